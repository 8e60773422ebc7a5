#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "aavr/core.hpp"
#include "aavr/rng.hpp"

namespace aavr::stochastic {

/// Sum of independent Bernoulli(p_c) indicators.
struct PoissonBinomial {
    std::vector<double> probs;
};

double pb_expectation(const PoissonBinomial& pb);
double pb_variance(const PoissonBinomial& pb);
/// Exact PMF over {0..m} by sequential convolution, O(m^2).
std::vector<double> pb_pmf(const PoissonBinomial& pb);

struct DemandModel {
    std::vector<double> mean;    // nu_j
    std::vector<double> stddev;  // sigma_j
};

/// Per-region draw from N(nu, sigma^2), rounded and clamped at zero.
std::vector<int> sample_demand(const DemandModel& model, RandomStream& rng);

struct DemandRecord {
    long long period_index = 0;
    int hour = 0;
    int weekday = 0;
    int day_of_month = 0;
    double demand = 0.0;
};

/// Windowed per-region demand series.
struct DemandHistory {
    std::vector<std::vector<DemandRecord>> regions;
    int window = 168;

    std::size_t n_regions() const { return regions.size(); }
    void append(std::size_t region, const DemandRecord& record);
};

struct ForecastQuery {
    int hour = 0;
    int weekday = 0;
};

/// Maps a region's recent history to its expected demand.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual double forecast(std::span<const DemandRecord> window, const ForecastQuery& query) const = 0;
};

/// Mean of past records in the same hour-of-day and weekday; falls back to
/// the same hour-of-day, then to the whole window.
class SeasonalMeanForecaster final : public Forecaster {
public:
    double forecast(std::span<const DemandRecord> window, const ForecastQuery& query) const override;
};

/// nu per region, clamped at zero.  Throws InputError if a region has no
/// history.
std::vector<double> forecast_demand(const Forecaster& forecaster, const DemandHistory& history,
                                    const ForecastQuery& query);

/// Root mean squared residual.
double estimate_residual_stddev(std::span<const double> actuals, std::span<const double> predictions);

double driver_travel_time(const RegionGraph& graph, RegionId driver_region, RegionId destination);

/// Realised travel time: N(tau, eps^2) clamped at zero.
double sample_travel_time(const RegionGraph& graph, RegionId from, RegionId to, RandomStream& rng);

struct RoadEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    double km = 0.0;
    double minutes = 0.0;
};

struct ShortestPathTables {
    Table distance_km;
    Table minutes;
};

/// Center-to-center shortest distances and shortest times, each minimised
/// over its own edge weight with Dijkstra from every center.
ShortestPathTables shortest_path_tables(std::size_t n_nodes, std::span<const RoadEdge> edges,
                                        std::span<const std::size_t> region_centers);

}  // namespace aavr::stochastic
