#include <tessel/format.hpp>
#include <tessel/serialize.hpp>

#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

namespace tessel {

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const KernelSpec& spec) {
  return Json{{"family", to_string(spec.family)},
              {"form", to_string(spec.form)},
              {"lengthscales", to_json(spec.lengthscales)},
              {"scale", spec.scale}};
}

KernelSpec kernel_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("kernel spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "family" && key != "form" && key != "lengthscales" && key != "scale") {
      throw ValidationError("unknown kernel key '" + key + "'");
    }
  }
  try {
    KernelSpec k;
    k.family = parse_family(j.at("family").get<std::string>());
    k.form = parse_form(j.value("form", std::string("tensor_product")));
    const auto theta = j.at("lengthscales").get<std::vector<double>>();
    k.lengthscales = Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size()));
    k.scale = j.value("scale", 1.0);
    k.validate();
    return k;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed kernel spec: ") + e.what());
  }
}

Json to_json(const WeightedTestSet& wts) {
  return Json{{"scheme", to_string(wts.scheme)},
              {"size", wts.points.size()},
              {"weights", to_json(wts.weights)},
              {"weight_sum", wts.weights.sum()},
              {"solver_residual", wts.residual},
              {"jitter", wts.jitter}};
}

Json to_json(const PredictivityReport& r) {
  Json j{{"q2_hat", r.q2_hat},
         {"q2_star", r.q2_star},
         {"q2_prime", r.q2_prime ? Json(*r.q2_prime) : Json(nullptr)},
         {"q2_prime_star", r.q2_prime_star ? Json(*r.q2_prime_star) : Json(nullptr)},
         {"ise_uniform", r.ise_uniform},
         {"ise_weighted", r.ise_weighted},
         {"denom_uniform", r.denom_uniform}};
  j["weights"] = to_json(r.weights);
  j["diagnostics"] = Json{{"jitter", r.weights.jitter}, {"solver_residual", r.weights.residual}};
  return j;
}

Json to_json(const KrigingModel& model) {
  return Json{{"kernel", to_json(model.kernel())},
              {"theta", to_json(model.theta())},
              {"beta", model.beta()},
              {"sigma2", model.sigma2()},
              {"log_likelihood", model.log_likelihood()},
              {"initial_log_likelihood", model.initial_log_likelihood()},
              {"likelihood_evaluations", model.evaluations()},
              {"jitter", model.jitter()}};
}

void write_bench_csv(std::ostream& out, const BenchResult& result) {
  out << "method,m,n,metric,value,seed\n";
  for (const auto& r : result.rows) {
    out << r.method << ',' << r.m << ',' << r.n << ',' << r.metric << ',' << format_double(r.value) << ','
        << r.seed << '\n';
  }
}

Json bench_summary(const BenchResult& result) {
  // Largest n per (method, m, metric), in first-appearance order.
  std::vector<std::tuple<std::string, Index, std::string>> keys;
  std::map<std::tuple<std::string, Index, std::string>, const BenchRow*> last;
  for (const auto& r : result.rows) {
    const auto key = std::make_tuple(r.method, r.m, r.metric);
    auto it = last.find(key);
    if (it == last.end()) {
      keys.push_back(key);
      last[key] = &r;
    } else if (r.n >= it->second->n) {
      it->second = &r;
    }
  }
  Json final_values = Json::array();
  for (const auto& key : keys) {
    const BenchRow& r = *last[key];
    final_values.push_back(
        Json{{"method", r.method}, {"m", r.m}, {"n", r.n}, {"metric", r.metric},
             {"value", std::isfinite(r.value) ? Json(r.value) : Json(nullptr)}});
  }
  return Json{{"rows", result.rows.size()}, {"warnings", result.warnings}, {"final", final_values}};
}

}  // namespace tessel
