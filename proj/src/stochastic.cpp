#include "aavr/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>

namespace aavr::stochastic {

double pb_expectation(const PoissonBinomial& pb) {
    double total = 0.0;
    for (double p : pb.probs) total += p;
    return total;
}

double pb_variance(const PoissonBinomial& pb) {
    double total = 0.0;
    for (double p : pb.probs) total += p * (1.0 - p);
    return total;
}

std::vector<double> pb_pmf(const PoissonBinomial& pb) {
    for (double p : pb.probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw InputError("poisson binomial probabilities must lie in [0,1]");
    }
    const std::size_t m = pb.probs.size();
    std::vector<double> pmf(m + 1, 0.0);
    pmf[0] = 1.0;
    for (std::size_t c = 0; c < m; ++c) {
        const double p = pb.probs[c];
        // Walk downwards so pmf[k-1] is still the previous stage's value.
        for (std::size_t k = c + 1; k > 0; --k) {
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    return pmf;
}

std::vector<int> sample_demand(const DemandModel& model, RandomStream& rng) {
    if (model.mean.size() != model.stddev.size()) {
        throw InputError("demand model mean and stddev differ in length");
    }
    std::vector<int> out(model.mean.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double draw = model.stddev[j] > 0.0 ? rng.normal(model.mean[j], model.stddev[j])
                                                  : model.mean[j];
        out[j] = static_cast<int>(std::max(0.0, std::round(draw)));
    }
    return out;
}

void DemandHistory::append(std::size_t region, const DemandRecord& record) {
    if (region >= regions.size()) regions.resize(region + 1);
    regions[region].push_back(record);
}

double SeasonalMeanForecaster::forecast(std::span<const DemandRecord> window,
                                        const ForecastQuery& query) const {
    auto mean_where = [&](auto&& keep) -> std::optional<double> {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : window) {
            if (keep(r)) {
                sum += r.demand;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    };
    if (auto v = mean_where([&](const DemandRecord& r) {
            return r.hour == query.hour && r.weekday == query.weekday;
        })) {
        return *v;
    }
    if (auto v = mean_where([&](const DemandRecord& r) { return r.hour == query.hour; })) return *v;
    return mean_where([](const DemandRecord&) { return true; }).value_or(0.0);
}

std::vector<double> forecast_demand(const Forecaster& forecaster, const DemandHistory& history,
                                    const ForecastQuery& query) {
    if (history.regions.empty()) throw InputError("demand history is empty");
    if (history.window < 1) throw InputError("demand history window must be at least 1");
    std::vector<double> nu(history.regions.size());
    for (std::size_t j = 0; j < nu.size(); ++j) {
        const auto& series = history.regions[j];
        if (series.empty()) {
            throw InputError("demand history for region " + std::to_string(j) + " is empty");
        }
        const std::size_t w = std::min<std::size_t>(series.size(), static_cast<std::size_t>(history.window));
        std::span<const DemandRecord> window(series.data() + (series.size() - w), w);
        nu[j] = std::max(0.0, forecaster.forecast(window, query));
    }
    return nu;
}

double estimate_residual_stddev(std::span<const double> actuals, std::span<const double> predictions) {
    if (actuals.size() != predictions.size()) {
        throw InputError("residual estimate: actuals and predictions differ in length");
    }
    if (actuals.size() < 2) throw InputError("residual estimate needs at least two observations");
    double ss = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const double r = actuals[i] - predictions[i];
        ss += r * r;
    }
    return std::sqrt(ss / static_cast<double>(actuals.size()));
}

double driver_travel_time(const RegionGraph& graph, RegionId driver_region, RegionId destination) {
    if (driver_region.index >= graph.n_regions() || destination.index >= graph.n_regions()) {
        throw InputError("travel time lookup outside the region graph");
    }
    return graph.travel_time(driver_region, destination);
}

double sample_travel_time(const RegionGraph& graph, RegionId from, RegionId to, RandomStream& rng) {
    const double tau = graph.travel_time(from, to);
    const double eps = graph.travel_stddev(from, to);
    if (eps <= 0.0) return tau;
    return std::max(0.0, rng.normal(tau, eps));
}

namespace {

std::vector<double> dijkstra(std::size_t n, const std::vector<std::vector<std::pair<std::size_t, double>>>& adj,
                             std::size_t source) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (auto [v, w] : adj[u]) {
            if (d + w < dist[v]) {
                dist[v] = d + w;
                heap.emplace(dist[v], v);
            }
        }
    }
    return dist;
}

}  // namespace

ShortestPathTables shortest_path_tables(std::size_t n_nodes, std::span<const RoadEdge> edges,
                                        std::span<const std::size_t> region_centers) {
    std::vector<std::vector<std::pair<std::size_t, double>>> by_km(n_nodes), by_min(n_nodes);
    for (const auto& e : edges) {
        if (e.from >= n_nodes || e.to >= n_nodes) throw InputError("road edge references an unknown node");
        if (e.km < 0.0 || e.minutes < 0.0) throw InputError("road edge weights must be nonnegative");
        by_km[e.from].emplace_back(e.to, e.km);
        by_min[e.from].emplace_back(e.to, e.minutes);
    }
    const std::size_t r = region_centers.size();
    ShortestPathTables out{Table(r, r), Table(r, r)};
    for (std::size_t i = 0; i < r; ++i) {
        if (region_centers[i] >= n_nodes) throw InputError("region center is not a road node");
        const auto km = dijkstra(n_nodes, by_km, region_centers[i]);
        const auto mins = dijkstra(n_nodes, by_min, region_centers[i]);
        for (std::size_t j = 0; j < r; ++j) {
            const std::size_t target = region_centers[j];
            if (!std::isfinite(km[target]) || !std::isfinite(mins[target])) {
                throw ScenarioError("region " + std::to_string(j) + " is unreachable from region " +
                                    std::to_string(i) + " on the road network");
            }
            out.distance_km(i, j) = km[target];
            out.minutes(i, j) = mins[target];
        }
    }
    return out;
}

}  // namespace aavr::stochastic
