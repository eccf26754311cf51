#include "dpviz/cli.hpp"

#include <charconv>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "dpviz/analysis.hpp"
#include "dpviz/dpgmm.hpp"
#include "dpviz/error.hpp"
#include "dpviz/labelmap.hpp"
#include "dpviz/model_io.hpp"
#include "dpviz/tensor_io.hpp"

namespace dpviz::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::map<std::string, PointMode> kModes{{"spatial", PointMode::Spatial},
                                              {"vector", PointMode::Vector}};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  return out;
}

// Model preprocessing replayed on fresh input.
PointMatrix prepare_points(const DpgmmModel& model, const FeatureTensor& tensor,
                           std::optional<PointMode> mode) {
  const PointMode m = mode.value_or(model.mode);
  if (m != model.mode)
    throw Error(Errc::ModeError, "model was fitted in a different --mode");
  return apply_scale(to_points(tensor, m), model.scale, model.feature_scale);
}

FeatureTensor labels_tensor(const std::vector<std::int32_t>& labels) {
  std::vector<double> data(labels.begin(), labels.end());
  return FeatureTensor({labels.size(), 1}, std::move(data));
}

std::vector<std::int32_t> labels_from_tensor(const FeatureTensor& t) {
  if (t.rank() != 2 || t.extent(1) != 1)
    throw Error(Errc::InvalidShape, "labels file must have shape (n, 1)");
  std::vector<std::int32_t> out;
  out.reserve(t.size());
  for (double v : t.data()) {
    if (v != std::floor(v) || v < 0 || v > 2147483647.0)
      throw Error(Errc::InvalidShape, "labels must be non-negative integers");
    out.push_back(static_cast<std::int32_t>(v));
  }
  return out;
}

enum class BackgroundMode { Auto, Fixed, None };
struct BackgroundChoice {
  BackgroundMode mode = BackgroundMode::Auto;
  std::int32_t id = 0;
};

BackgroundChoice parse_background(const std::string& s, bool allow_none) {
  if (s == "auto") return {};
  if (s == "none") {
    if (!allow_none) throw UsageError("--background none is not valid here");
    return {BackgroundMode::None, 0};
  }
  std::int32_t id = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), id);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || id < 0)
    throw UsageError("--background expects auto, none or a cluster id, got '" + s + "'");
  return {BackgroundMode::Fixed, id};
}

void apply_background(LabelMap& map, const BackgroundChoice& bg) {
  switch (bg.mode) {
    case BackgroundMode::Auto: map.background_id = select_background(map); break;
    case BackgroundMode::Fixed: map.background_id = bg.id; break;
    case BackgroundMode::None: map.background_id.reset(); break;
  }
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  std::size_t h = 0, w = 0;
  if (x != std::string::npos) {
    const auto r1 = std::from_chars(s.data(), s.data() + x, h);
    const auto r2 = std::from_chars(s.data() + x + 1, s.data() + s.size(), w);
    if (r1.ec == std::errc{} && r2.ec == std::errc{} && r1.ptr == s.data() + x &&
        r2.ptr == s.data() + s.size() && h > 0 && w > 0)
      return {h, w};
  }
  throw UsageError("--grid expects HxW, got '" + s + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dirichlet process mixture clustering of convnet activations", "dpviz"};
  app.require_subcommand(1, 1);

  // fit
  std::string fit_input, fit_out, fit_mode, kernels_name = "auto";
  DpgmmConfig cfg;
  double scale_lo = 0.0, scale_hi = 10.0;
  bool no_scale = false, per_feature = false;
  auto* fit_cmd = app.add_subcommand("fit", "fit a truncated DP Gaussian mixture");
  fit_cmd->add_option("--input", fit_input, "activation tensor (.npy)")->required();
  fit_cmd->add_option("--mode", fit_mode, "spatial|vector")->required()->check(
      CLI::IsMember({"spatial", "vector"}));
  fit_cmd->add_option("--alpha", cfg.alpha, "DP concentration")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-components", cfg.truncation, "truncation level T")->check(
      CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  fit_cmd->add_option("--tol", cfg.tol, "relative ELBO change threshold")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-iter", cfg.max_iter)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30));
  fit_cmd->add_option("--seed", cfg.seed);
  fit_cmd->add_option("--beta0", cfg.priors.beta0, "prior mean-precision scale")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--a0", cfg.priors.a0, "prior Gamma shape")->check(CLI::PositiveNumber);
  auto* lo_opt = fit_cmd->add_option("--scale-lo", scale_lo);
  auto* hi_opt = fit_cmd->add_option("--scale-hi", scale_hi);
  auto* no_scale_flag = fit_cmd->add_flag("--no-scale", no_scale, "fit raw values");
  no_scale_flag->excludes(lo_opt)->excludes(hi_opt);
  fit_cmd->add_flag("--scale-per-feature", per_feature, "min-max each dimension separately")
      ->excludes(no_scale_flag);
  fit_cmd->add_option("--threads", cfg.threads)->check(CLI::Range(1u, 1024u));
  fit_cmd->add_option("--kernels", kernels_name, "auto|scalar|avx2|neon")
      ->check(CLI::IsMember({"auto", "scalar", "avx2", "neon"}));
  fit_cmd->add_option("--out", fit_out, "model JSON path")->required();

  // predict
  std::string pr_model, pr_input, pr_mode, pr_out;
  unsigned pr_threads = 1;
  auto* predict_cmd = app.add_subcommand("predict", "assign points to clusters");
  predict_cmd->add_option("--model", pr_model)->required();
  predict_cmd->add_option("--input", pr_input)->required();
  predict_cmd->add_option("--mode", pr_mode)->check(CLI::IsMember({"spatial", "vector"}));
  predict_cmd->add_option("--threads", pr_threads)->check(CLI::Range(1u, 1024u));
  predict_cmd->add_option("--out", pr_out, "labels (.npy, shape (n, 1))")->required();

  // labelmap
  std::string lm_model, lm_input, lm_background = "auto", lm_out;
  std::size_t lm_index = 0;
  auto* labelmap_cmd = app.add_subcommand("labelmap", "render one image's cluster map as PPM");
  labelmap_cmd->add_option("--model", lm_model)->required();
  labelmap_cmd->add_option("--input", lm_input)->required();
  labelmap_cmd->add_option("--image-index", lm_index)->required();
  labelmap_cmd->add_option("--background", lm_background, "auto|<id>|none");
  labelmap_cmd->add_option("--out", lm_out)->required();

  // centers
  std::string ce_model, ce_input, ce_background = "auto", ce_out;
  std::size_t ce_factor = 1;
  auto* centers_cmd = app.add_subcommand("centers", "non-background cluster centres in input pixels");
  centers_cmd->add_option("--model", ce_model)->required();
  centers_cmd->add_option("--input", ce_input)->required();
  centers_cmd->add_option("--subsample-factor", ce_factor)->required()->check(
      CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  centers_cmd->add_option("--background", ce_background, "auto|<id>");
  centers_cmd->add_option("--out", ce_out)->required();

  // report
  std::string re_labels, re_meta, re_model, re_out;
  auto* report_cmd = app.add_subcommand("report", "class composition of each cluster");
  report_cmd->add_option("--labels", re_labels)->required();
  report_cmd->add_option("--meta", re_meta)->required();
  report_cmd->add_option("--model", re_model);
  report_cmd->add_option("--out", re_out)->required();

  // synth
  SynthSpec sspec;
  std::string sy_out, sy_truth, sy_grid;
  auto* synth_cmd = app.add_subcommand("synth", "generate a labelled Gaussian mixture");
  synth_cmd->add_option("--k", sspec.k_true)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--dim", sspec.dim)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--n", sspec.n_points)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--sep", sspec.separation)->required();
  synth_cmd->add_option("--sigma", sspec.sigma)->required()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", sspec.seed)->required();
  synth_cmd->add_option("--grid", sy_grid, "HxW: write an (n/(H*W), dim, H, W) spatial tensor");
  synth_cmd->add_option("--out", sy_out)->required();
  synth_cmd->add_option("--truth", sy_truth)->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("dpviz");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      if (!(scale_hi > scale_lo)) throw UsageError("--scale-hi must exceed --scale-lo");
      if (kernels_name != "auto") cfg.isa = kernels::parse_isa(kernels_name);
      cfg.warn_unscaled = false;
      const auto tensor = load_npy(fit_input);
      PointMatrix pm = to_points(tensor, kModes.at(fit_mode));
      if (!no_scale)
        pm = per_feature ? scale_features_to_range(pm, scale_lo, scale_hi)
                         : scale_to_range(pm, scale_lo, scale_hi);
      else
        err << "dpviz: fitting unscaled values\n";
      const FitResult res = fit(pm, cfg);
      save_model(res.model, fit_out);
      err << "dpviz fit: " << pm.n_points() << " points, dim " << pm.dim() << ", "
          << res.iterations << " iterations, " << (res.converged ? "converged" : "not converged")
          << ", " << res.effective_components << " effective components, ELBO "
          << res.elbo_trace.back() << "\n";
    } else if (predict_cmd->parsed()) {
      const auto model = load_model(pr_model);
      const auto tensor = load_npy(pr_input);
      const std::optional<PointMode> mode =
          pr_mode.empty() ? std::nullopt : std::optional(kModes.at(pr_mode));
      const auto pm = prepare_points(model, tensor, mode);
      const auto labels = predict(model, pm, ExecPolicy{pr_threads, kernels::detect_isa()});
      save_npy(labels_tensor(labels), pr_out, Dtype::Float64);
    } else if (labelmap_cmd->parsed()) {
      const auto bg = parse_background(lm_background, true);
      const auto model = load_model(lm_model);
      const auto tensor = load_npy(lm_input);
      const auto pm = prepare_points(model, tensor, PointMode::Spatial);
      if (lm_index >= tensor.extent(0))
        throw UsageError("--image-index " + std::to_string(lm_index) + " out of range (" +
                         std::to_string(tensor.extent(0)) + " images)");
      auto maps = unflatten_labels(pm, predict(model, pm));
      LabelMap& map = maps[lm_index];
      apply_background(map, bg);
      write_ppm(render(map, Palette::golden(model.truncation)), std::filesystem::path(lm_out));
    } else if (centers_cmd->parsed()) {
      const auto bg = parse_background(ce_background, false);
      const auto model = load_model(ce_model);
      const auto tensor = load_npy(ce_input);
      const auto pm = prepare_points(model, tensor, PointMode::Spatial);
      auto maps = unflatten_labels(pm, predict(model, pm));
      std::vector<ClusterCenter> centers;
      for (auto& map : maps) {
        apply_background(map, bg);
        try {
          const auto c = cluster_centers(map, ce_factor);
          centers.insert(centers.end(), c.begin(), c.end());
        } catch (const Error& e) {
          if (e.code() != Errc::NoForegroundClusters) throw;
          err << "dpviz centers: image " << map.image_index << " has no foreground clusters\n";
        }
      }
      auto f = open_out(ce_out);
      write_centers_csv(centers, f);
    } else if (report_cmd->parsed()) {
      const auto labels = labels_from_tensor(load_npy(re_labels));
      const auto meta = load_meta(re_meta);
      auto report = composition(labels, meta);
      if (!re_model.empty()) {
        const auto model = load_model(re_model);
        const auto weights = weights_by_cluster_id(model);
        annotate_report(report, weights, model.alpha, model.truncation);
      }
      auto f = open_out(re_out);
      f << report_to_json(report);
    } else if (synth_cmd->parsed()) {
      if (sspec.n_points < sspec.k_true) throw UsageError("--n must be at least --k");
      const auto data = synth_generate(sspec);
      const std::size_t N = sspec.n_points, D = sspec.dim;
      const auto values = data.points.values();
      if (sy_grid.empty()) {
        save_npy(FeatureTensor({N, D}, std::vector<double>(values.begin(), values.end())), sy_out);
      } else {
        const auto [h, w] = parse_grid(sy_grid);
        if (N % (h * w) != 0) throw UsageError("--n must be a multiple of H*W for --grid");
        const std::size_t images = N / (h * w);
        std::vector<double> t(N * D);
        for (std::size_t p = 0; p < N; ++p) {
          const std::size_t i = p / (h * w), px = p % (h * w);
          for (std::size_t c = 0; c < D; ++c) t[(i * D + c) * h * w + px] = values[p * D + c];
        }
        save_npy(FeatureTensor({images, D, h, w}, std::move(t)), sy_out);
      }
      auto f = open_out(sy_truth);
      f << "label\n";
      for (auto l : data.truth) f << l << '\n';
    }
  } catch (const UsageError& e) {
    err << "dpviz: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "dpviz: " << e.what() << "\n";
    if (e.code() == Errc::NonFiniteElbo) return kNumericalFailure;
    if (e.code() == Errc::InvalidConfig) return kUsage;
    return kDataError;
  } catch (const std::exception& e) {
    err << "dpviz: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace dpviz::cli
