#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aavr/behavior.hpp"
#include "aavr/core.hpp"
#include "aavr/rebalance.hpp"
#include "aavr/stochastic.hpp"

namespace aavr {

/// Expected requests per period by region and time-of-week slot.  Slots wrap
/// around, so a single column is a stationary profile.
struct DemandProfile {
    Table mean;                  // regions x slots
    std::vector<double> stddev;  // per region
    double slot_minutes = 60.0;

    std::size_t slot_at(double minute) const;
    std::vector<double> mean_at(double minute) const;
};

/// Everything needed to replay a scenario.
struct ScenarioBundle {
    std::string name;
    RegionGraph graph;
    std::vector<behavior::DriverAgent> drivers;
    DemandProfile demand;
    /// Past demand for the forecaster.  Left empty, the optimiser is given
    /// the profile mean.
    stochastic::DemandHistory history;
    Table od;  // trip destination shares, rows sum to 1
    ScenarioConfig config;
    double start_minute = 0.0;  // minute of the week at period 0

    std::size_t n_regions() const { return graph.n_regions(); }
    /// Throws ScenarioError on inconsistent dimensions.
    void validate() const;
};

/// Idle drivers of the bundle as the optimiser sees them.  Only drivers with
/// pinned mu and L are accepted; beliefs need the simulator.
rebalance::FleetSnapshot pinned_snapshot(const ScenarioBundle& bundle, const std::vector<double>& nu);

/// Two stations A=0, B=1; 1000 drivers at A with mu = 0.5 and L = (1, 0);
/// demand (0, 100).
ScenarioBundle case_study_1(double travel_minutes = 4.0);
/// As case study 1 with L = (0.5, 0.5).
ScenarioBundle case_study_2(double travel_minutes = 4.0);
/// As case study 1 with mu ~ Uniform(0, 1) per driver.
ScenarioBundle case_study_3(unsigned long long seed, double travel_minutes = 4.0);

/// Weights of the preference model shared by synthetic drivers.
behavior::PreferenceModel synthetic_preference();

/// Jittered grid of regions joined by a road graph, seasonal demand, random
/// OD rows, Beta(1,1) beliefs and a week of synthetic demand history.
ScenarioBundle synthetic_network(std::size_t n_regions, std::size_t n_drivers, unsigned long long seed);

/// Choices drawn from a known preference model over random candidate
/// features, for checking that fitting recovers it.
std::vector<behavior::DecisionRecord> planted_decision_corpus(const behavior::PreferenceModel& model,
                                                              std::size_t n_drivers,
                                                              std::size_t decisions_per_driver,
                                                              std::size_t n_candidates, unsigned long long seed);

struct TripIngest {
    RegionGraph graph;
    stochastic::DemandHistory history;
    Table od;
    long long rows = 0;
    long long skipped_rows = 0;
    long long fallback_pairs = 0;
    std::vector<std::string> warnings;
};

struct IngestOptions {
    std::size_t n_regions = 0;      // 0: one more than the largest id seen
    double fallback_speed = 0.5;    // km per minute
    double fallback_km = 2.0;       // used when no pair at all has a distance
};

/// Reads (pickup_region, dropoff_region, minutes, km, hour, weekday) rows.
/// Malformed rows are skipped and counted.  Throws ScenarioError on a file
/// with no usable rows.
TripIngest ingest_trip_records(const std::filesystem::path& path, const IngestOptions& options = {});
TripIngest ingest_trip_records(std::istream& in, const std::string& source, const IngestOptions& options = {});

}  // namespace aavr
