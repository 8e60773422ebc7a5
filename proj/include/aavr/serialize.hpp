#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "aavr/behavior.hpp"
#include "aavr/core.hpp"
#include "aavr/scenarios.hpp"
#include "aavr/stochastic.hpp"

namespace aavr::io {

/// Config keys are the ScenarioConfig field names; absent keys keep their
/// defaults and unknown keys are rejected.
ScenarioConfig config_from_json(const nlohmann::json& j, const ScenarioConfig& base = {});
nlohmann::json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::filesystem::path& path, const ScenarioConfig& base = {});

nlohmann::json bundle_to_json(const ScenarioBundle& bundle);
ScenarioBundle bundle_from_json(const nlohmann::json& j);
void save_bundle(const ScenarioBundle& bundle, const std::filesystem::path& path);
ScenarioBundle load_bundle(const std::filesystem::path& path);

/// driver_id, region, alpha_r, beta_r, alpha_p, beta_p, w_0..w_k
std::vector<behavior::DriverAgent> read_drivers_csv(std::istream& in, const std::string& source);
void write_drivers_csv(std::ostream& out, const std::vector<behavior::DriverAgent>& drivers);

/// region_id, period_index, hour, weekday, day_of_month, demand
stochastic::DemandHistory read_demand_csv(std::istream& in, const std::string& source);
void write_demand_csv(std::ostream& out, const stochastic::DemandHistory& history);

/// One row per candidate region: driver_id, period, chosen_region, region,
/// f_0..f_k.  Rows of one decision share (driver_id, period).
std::vector<behavior::DecisionRecord> read_decisions_csv(std::istream& in, const std::string& source);
void write_decisions_csv(std::ostream& out, const std::vector<behavior::DecisionRecord>& decisions);

/// pickup_region, dropoff_region, minutes, km, hour, weekday
struct TripRecord {
    std::size_t pickup_region = 0;
    std::size_t dropoff_region = 0;
    double minutes = 0.0;
    double km = 0.0;
    int hour = 0;
    int weekday = 0;
};
void write_trips_csv(std::ostream& out, const std::vector<TripRecord>& trips);

void write_table_csv(std::ostream& out, const Table& table, const std::string& value_name);

}  // namespace aavr::io
