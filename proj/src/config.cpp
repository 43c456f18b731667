#include "gbdl/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gbdl/image.hpp"

namespace gbdl {

using nlohmann::json;

int RunConfig::wavelet_levels(int side) const {
  return levels >= 0 ? levels : default_wavelet_levels(side);
}

void RunConfig::validate() const {
  if (patch_area < 1) throw std::invalid_argument("config: patch_area must be >= 1");
  if (dict_size < 1) throw std::invalid_argument("config: dict_size must be >= 1");
  if (num_groups < 1) throw std::invalid_argument("config: num_groups must be >= 1");
  if (radius < 0.0) throw std::invalid_argument("config: radius must be >= 0");
  if (!(support_tau > 0.0 && support_tau < 1.0))
    throw std::invalid_argument("config: support_tau must lie in (0,1)");
  if (rho <= 0.0) throw std::invalid_argument("config: rho must be > 0");
  if (lambda_g < 0.0) throw std::invalid_argument("config: lambda_g must be >= 0");
  if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("config: max_iters must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("config: burn_in must be >= 0");
  if (!(rate_first > 0.0 && rate_first <= 1.0))
    throw std::invalid_argument("config: rate_first must lie in (0,1]");
  if (!(rate_rest > 0.0 && rate_rest <= 1.0))
    throw std::invalid_argument("config: rate_rest must lie in (0,1]");
  if (reference_mode != "prev" && reference_mode != "first")
    throw std::invalid_argument("config: reference_mode must be 'prev' or 'first'");
  if (noise_sigma < 0.0) throw std::invalid_argument("config: noise_sigma must be >= 0");
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["patch_area"] = c.patch_area;
  j["dict_size"] = c.dict_size;
  j["num_groups"] = c.num_groups;
  j["radius"] = c.radius;
  j["kernel_width"] = c.kernel_width;
  j["support_tau"] = c.support_tau;
  j["lambda_g"] = c.lambda_g;
  j["rho"] = c.rho;
  j["lambda"] = c.lambda;
  j["noiseless"] = c.noiseless;
  j["max_iters"] = c.max_iters;
  j["tolerance"] = c.tolerance;
  j["burn_in"] = c.burn_in;
  j["master_seed"] = c.master_seed;
  j["rate_first"] = c.rate_first;
  j["rate_rest"] = c.rate_rest;
  j["seed_angle"] = c.seed_angle;
  j["noise_sigma"] = c.noise_sigma;
  j["reference_mode"] = c.reference_mode;
  j["self_only_dependence"] = c.self_only_dependence;
  j["kmeans_iters"] = c.kmeans_iters;
  j["levels"] = c.levels;
  j["hyper"] = {{"c0", c.hyper.c0},   {"c1", c.hyper.c1}, {"eta0", c.hyper.eta0},
                {"e0", c.hyper.e0},   {"f0", c.hyper.f0}, {"g0", c.hyper.g0},
                {"h0", c.hyper.h0}};
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("patch_area", c.patch_area);
  get("dict_size", c.dict_size);
  get("num_groups", c.num_groups);
  get("radius", c.radius);
  get("kernel_width", c.kernel_width);
  get("support_tau", c.support_tau);
  get("lambda_g", c.lambda_g);
  get("rho", c.rho);
  get("lambda", c.lambda);
  get("noiseless", c.noiseless);
  get("max_iters", c.max_iters);
  get("tolerance", c.tolerance);
  get("burn_in", c.burn_in);
  get("master_seed", c.master_seed);
  get("rate_first", c.rate_first);
  get("rate_rest", c.rate_rest);
  get("seed_angle", c.seed_angle);
  get("noise_sigma", c.noise_sigma);
  get("reference_mode", c.reference_mode);
  get("self_only_dependence", c.self_only_dependence);
  get("kmeans_iters", c.kmeans_iters);
  get("levels", c.levels);
  if (j.contains("hyper")) {
    const json& h = j.at("hyper");
    auto geth = [&](const char* key, double& field) {
      if (h.contains(key)) field = h.at(key).get<double>();
    };
    geth("c0", c.hyper.c0);
    geth("c1", c.hyper.c1);
    geth("eta0", c.hyper.eta0);
    geth("e0", c.hyper.e0);
    geth("f0", c.hyper.f0);
    geth("g0", c.hyper.g0);
    geth("h0", c.hyper.h0);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << config_to_json(cfg) << "\n";
}

}  // namespace gbdl
