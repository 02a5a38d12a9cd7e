#pragma once

#include <tessel/bench.hpp>

#include <json.hpp>

#include <iosfwd>

namespace tessel {

using Json = nlohmann::ordered_json;

Json to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const Json& j);

Json to_json(const Vector& v);
Json to_json(const WeightedTestSet& wts);
Json to_json(const PredictivityReport& report);

/// theta, beta, log-likelihood, jitter and search diagnostics.
Json to_json(const KrigingModel& model);

/// Long format: method,m,n,metric,value,seed.
void write_bench_csv(std::ostream& out, const BenchResult& result);

/// Row count, warnings and the values at the largest n per (method, m, metric).
Json bench_summary(const BenchResult& result);

}  // namespace tessel
