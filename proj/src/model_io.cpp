#include "dpviz/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "dpviz/error.hpp"

namespace dpviz {

using nlohmann::json;

namespace {

json rows_of(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r < rows; ++r)
    out.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                      flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
  return out;
}

std::vector<double> flatten_rows(const json& j, std::size_t rows, std::size_t cols,
                                 const char* name) {
  if (!j.is_array() || j.size() != rows)
    throw Error(Errc::MalformedModel, std::string(name) + " must have one row per component");
  std::vector<double> flat;
  flat.reserve(rows * cols);
  for (const auto& row : j) {
    auto v = row.get<std::vector<double>>();
    if (v.size() != cols) throw Error(Errc::MalformedModel, std::string(name) + " row length");
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return flat;
}

json scale_to_json(const ScaleRecord& s) {
  return {{"src_min", s.src_min}, {"src_max", s.src_max}, {"lo", s.lo}, {"hi", s.hi},
          {"degenerate", s.degenerate}};
}

ScaleRecord scale_from_json(const json& j) {
  return {j.at("src_min").get<double>(), j.at("src_max").get<double>(), j.at("lo").get<double>(),
          j.at("hi").get<double>(), j.at("degenerate").get<bool>()};
}

std::vector<double> sized(const json& j, const char* key, std::size_t n) {
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != n) throw Error(Errc::MalformedModel, std::string(key) + " length");
  return v;
}

}  // namespace

std::string model_to_json(const DpgmmModel& model) {
  const std::size_t T = model.truncation, D = model.dim;
  json j;
  j["alpha"] = model.alpha;
  j["truncation"] = T;
  j["dim"] = D;
  j["seed"] = model.seed;
  j["tol"] = model.tol;
  j["max_iter"] = model.max_iter;
  j["mode"] = model.mode == PointMode::Spatial ? "spatial" : "vector";
  j["gamma1"] = model.gamma1;
  j["gamma2"] = model.gamma2;
  j["beta"] = model.beta;
  j["a"] = model.a;
  j["m"] = rows_of(model.m, T, D);
  j["b"] = rows_of(model.b, T, D);
  j["mass"] = model.mass;
  j["prior"] = {{"m0", model.prior.m0},
                {"beta0", model.prior.beta0},
                {"a0", model.prior.a0},
                {"b0", model.prior.b0}};
  j["scale"] = model.scale ? scale_to_json(*model.scale) : json(nullptr);
  json fs = json::array();
  for (const auto& s : model.feature_scale) fs.push_back(scale_to_json(s));
  j["feature_scale"] = fs;
  j["elbo_trace"] = model.elbo_trace;
  j["converged"] = model.converged;
  return j.dump(2) + "\n";
}

DpgmmModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, e.what());
  }
  try {
    DpgmmModel m;
    m.alpha = j.at("alpha").get<double>();
    m.truncation = j.at("truncation").get<std::size_t>();
    m.dim = j.at("dim").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.tol = j.value("tol", 1e-4);
    m.max_iter = j.value("max_iter", std::size_t{500});
    const auto mode = j.value("mode", std::string("vector"));
    if (mode != "spatial" && mode != "vector") throw Error(Errc::MalformedModel, "mode " + mode);
    m.mode = mode == "spatial" ? PointMode::Spatial : PointMode::Vector;
    const std::size_t T = m.truncation, D = m.dim;
    if (T < 1 || D < 1) throw Error(Errc::MalformedModel, "truncation and dim must be positive");
    m.gamma1 = sized(j, "gamma1", T);
    m.gamma2 = sized(j, "gamma2", T);
    m.beta = sized(j, "beta", T);
    m.a = sized(j, "a", T);
    m.m = flatten_rows(j.at("m"), T, D, "m");
    m.b = flatten_rows(j.at("b"), T, D, "b");
    m.mass = j.contains("mass") ? sized(j, "mass", T) : std::vector<double>(T, 0.0);
    const auto& p = j.at("prior");
    m.prior.m0 = sized(p, "m0", D);
    m.prior.beta0 = p.at("beta0").get<double>();
    m.prior.a0 = p.at("a0").get<double>();
    m.prior.b0 = sized(p, "b0", D);
    if (j.contains("scale") && !j.at("scale").is_null()) m.scale = scale_from_json(j.at("scale"));
    if (j.contains("feature_scale"))
      for (const auto& s : j.at("feature_scale")) m.feature_scale.push_back(scale_from_json(s));
    m.elbo_trace = j.value("elbo_trace", std::vector<double>{});
    m.converged = j.value("converged", false);

    auto positive = [](const std::vector<double>& v, const char* name) {
      for (double x : v)
        if (!(x > 0.0)) throw Error(Errc::MalformedModel, std::string(name) + " must be positive");
    };
    positive(m.gamma1, "gamma1");
    positive(m.gamma2, "gamma2");
    positive(m.beta, "beta");
    positive(m.a, "a");
    positive(m.b, "b");
    if (!(m.alpha > 0.0)) throw Error(Errc::MalformedModel, "alpha must be positive");
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, e.what());
  }
}

void save_model(const DpgmmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << model_to_json(model);
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

DpgmmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace dpviz
