#include "aavr/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "aavr/csv.hpp"
#include "aavr/rng.hpp"

namespace aavr {

std::size_t DemandProfile::slot_at(double minute) const {
    const std::size_t slots = mean.cols();
    if (slots <= 1) return 0;
    const auto k = static_cast<long long>(std::floor(minute / slot_minutes));
    const auto n = static_cast<long long>(slots);
    return static_cast<std::size_t>(((k % n) + n) % n);
}

std::vector<double> DemandProfile::mean_at(double minute) const {
    const std::size_t s = slot_at(minute);
    std::vector<double> out(mean.rows());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = mean(j, s);
    return out;
}

void ScenarioBundle::validate() const {
    const std::size_t R = graph.n_regions();
    if (R == 0) throw ScenarioError("scenario '" + name + "' has no regions");
    if (demand.mean.rows() != R || demand.mean.cols() == 0) {
        throw ScenarioError("scenario '" + name + "': demand profile does not match the region count");
    }
    if (demand.stddev.size() != R) throw ScenarioError("scenario '" + name + "': demand stddev has the wrong length");
    if (!(demand.slot_minutes > 0.0)) throw ScenarioError("scenario '" + name + "': slot length must be positive");
    if (od.rows() != R || od.cols() != R) throw ScenarioError("scenario '" + name + "': OD matrix has the wrong shape");
    for (std::size_t i = 0; i < R; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < R; ++j) {
            if (od(i, j) < 0.0) throw ScenarioError("scenario '" + name + "': negative OD share");
            total += od(i, j);
        }
        if (std::abs(total - 1.0) > 1e-9) throw ScenarioError("scenario '" + name + "': OD row does not sum to 1");
    }
    if (!history.regions.empty() && history.n_regions() != R) {
        throw ScenarioError("scenario '" + name + "': demand history has the wrong region count");
    }
    for (std::size_t c = 0; c < drivers.size(); ++c) {
        const auto& d = drivers[c];
        if (d.id.index != c) throw ScenarioError("scenario '" + name + "': driver ids must be 0..n-1 in order");
        if (d.region.index >= R) throw ScenarioError("scenario '" + name + "': driver in an unknown region");
        if (d.pinned_preference && d.pinned_preference->size() != R) {
            throw ScenarioError("scenario '" + name + "': pinned preference has the wrong length");
        }
        if (!d.pinned_preference && d.preference.feature_dim() != behavior::kStandardFeatureDim) {
            throw ScenarioError("scenario '" + name + "': driver preference model needs " +
                                std::to_string(behavior::kStandardFeatureDim) + " features");
        }
    }
    config.validate();
}

rebalance::FleetSnapshot pinned_snapshot(const ScenarioBundle& bundle, const std::vector<double>& nu) {
    rebalance::FleetSnapshot s{{}, nu, bundle.graph, bundle.config.horizon, bundle.config};
    for (const auto& d : bundle.drivers) {
        if (!d.idle()) continue;
        if (!d.pinned_mu || !d.pinned_preference) {
            throw InputError("driver " + std::to_string(d.id.index) + " has no pinned mu and preference");
        }
        s.drivers.push_back({d.id, d.region, *d.pinned_mu, *d.pinned_preference});
    }
    return s;
}

namespace {

constexpr std::size_t kStationA = 0;
constexpr std::size_t kStationB = 1;
constexpr double kStationKm = 2.0;
constexpr std::size_t kCaseStudyDrivers = 1000;

ScenarioBundle two_stations(std::string name, double travel_minutes) {
    if (!(travel_minutes >= 0.0)) throw InputError("travel time must be nonnegative");
    Table d(2, 2), t(2, 2);
    d(kStationA, kStationB) = d(kStationB, kStationA) = kStationKm;
    t(kStationA, kStationB) = t(kStationB, kStationA) = travel_minutes;

    ScenarioBundle b;
    b.name = std::move(name);
    b.graph = RegionGraph::deterministic(d, t);
    b.demand.mean = Table(2, 1);
    b.demand.mean(kStationB, 0) = 100.0;
    b.demand.stddev = {0.0, 0.0};
    b.od = Table(2, 2);
    b.od(kStationA, kStationB) = b.od(kStationB, kStationA) = 1.0;
    b.drivers.resize(kCaseStudyDrivers);
    for (std::size_t c = 0; c < kCaseStudyDrivers; ++c) {
        auto& dr = b.drivers[c];
        dr.id = DriverId{c};
        dr.region = RegionId{kStationA};
        dr.pinned_mu = 0.5;  // Beta(1,1) against Beta(1,1)
        dr.pinned_preference = std::vector<double>{1.0, 0.0};
    }
    return b;
}

}  // namespace

ScenarioBundle case_study_1(double travel_minutes) { return two_stations("case_study_1", travel_minutes); }

ScenarioBundle case_study_2(double travel_minutes) {
    auto b = two_stations("case_study_2", travel_minutes);
    for (auto& d : b.drivers) d.pinned_preference = std::vector<double>{0.5, 0.5};
    return b;
}

ScenarioBundle case_study_3(unsigned long long seed, double travel_minutes) {
    auto b = two_stations("case_study_3", travel_minutes);
    b.config.seed = seed;
    auto rng = seeded_rng(seed, "case_study_3/mu");
    for (auto& d : b.drivers) d.pinned_mu = rng.uniform();
    return b;
}

behavior::PreferenceModel synthetic_preference() {
    // search distance, expected pickups, median trip km, hour, weekday, intercept
    return {{-1.5, 1.0, 0.3, 0.0, 0.0, 0.0}};
}

namespace {

constexpr double kGridSpacingKm = 0.8;
constexpr double kSpeedKmPerMin = 0.5;

double daily_shape(double hour, double morning_share) {
    auto bump = [](double h, double centre, double width) {
        double d = std::abs(h - centre);
        d = std::min(d, 24.0 - d);
        return std::exp(-d * d / (2.0 * width * width));
    };
    return 0.35 + 1.2 * morning_share * bump(hour, 8.5, 1.5) + 1.2 * (1.0 - morning_share) * bump(hour, 18.0, 2.0) +
           0.4 * bump(hour, 13.0, 3.0);
}

}  // namespace

ScenarioBundle synthetic_network(std::size_t n_regions, std::size_t n_drivers, unsigned long long seed) {
    if (n_regions < 2) throw InputError("a synthetic network needs at least two regions");
    const std::size_t R = n_regions;
    ScenarioBundle b;
    b.name = "synthetic_" + std::to_string(R) + "x" + std::to_string(n_drivers);
    b.config.seed = seed;
    // Desk-scale solver budget and a travel weight that stays above the gap.
    b.config.beta = 0.01;
    b.config.mip_relative_gap = 1e-4;
    b.config.node_limit = 2000;
    b.config.aavr_tiebreak = false;
    b.start_minute = 7.0 * 60.0;  // Monday 07:00

    // Region centres on a jittered grid.
    auto geo = seeded_rng(seed, "network/geometry");
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(R))));
    std::vector<double> cx(R), cy(R);
    for (std::size_t i = 0; i < R; ++i) {
        cx[i] = kGridSpacingKm * (static_cast<double>(i % side) + geo.uniform(-0.25, 0.25));
        cy[i] = kGridSpacingKm * (static_cast<double>(i / side) + geo.uniform(-0.25, 0.25));
    }
    // Roads between grid neighbours (diagonals included), slightly winding.
    std::vector<stochastic::RoadEdge> roads;
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = i + 1; j < R; ++j) {
            const auto di = static_cast<long long>(i % side) - static_cast<long long>(j % side);
            const auto dj = static_cast<long long>(i / side) - static_cast<long long>(j / side);
            if (std::abs(di) > 1 || std::abs(dj) > 1) continue;
            const double km = std::hypot(cx[i] - cx[j], cy[i] - cy[j]) * geo.uniform(1.1, 1.3);
            const double minutes = std::ceil(km / kSpeedKmPerMin);
            roads.push_back({i, j, km, minutes});
            roads.push_back({j, i, km, minutes});
        }
    }
    std::vector<std::size_t> centres(R);
    for (std::size_t i = 0; i < R; ++i) centres[i] = i;
    auto tables = stochastic::shortest_path_tables(R, roads, centres);
    Table eps(R, R);
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < R; ++j) eps(i, j) = 0.1 * tables.minutes(i, j);
    }
    b.graph = RegionGraph(tables.distance_km, tables.minutes, eps);

    // Seasonal demand: each region mixes a morning and an evening peak.
    auto dem = seeded_rng(seed, "network/demand");
    std::vector<double> weight(R), morning(R);
    double total_weight = 0.0;
    for (std::size_t j = 0; j < R; ++j) {
        weight[j] = dem.gamma(0.8) + 0.05;
        morning[j] = dem.uniform();
        total_weight += weight[j];
    }
    const double per_period = 0.9 * static_cast<double>(n_drivers);
    b.demand.slot_minutes = 60.0;
    b.demand.mean = Table(R, 168);
    b.demand.stddev.resize(R);
    for (std::size_t j = 0; j < R; ++j) {
        double avg = 0.0;
        for (std::size_t s = 0; s < 168; ++s) {
            const double hour = static_cast<double>(s % 24);
            const double weekend = (s / 24) >= 5 ? 0.8 : 1.0;
            b.demand.mean(j, s) = per_period * weight[j] / total_weight * daily_shape(hour, morning[j]) * weekend;
            avg += b.demand.mean(j, s) / 168.0;
        }
        b.demand.stddev[j] = 0.2 * avg + 0.3;
    }

    // Trip destinations.
    auto od = seeded_rng(seed, "network/od");
    b.od = Table(R, R);
    for (std::size_t i = 0; i < R; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < R; ++j) {
            b.od(i, j) = od.gamma(1.0) * (0.5 + weight[j] / total_weight * static_cast<double>(R));
            total += b.od(i, j);
        }
        for (std::size_t j = 0; j < R; ++j) b.od(i, j) /= total;
    }

    // One window of past demand for the forecaster.
    auto hist = seeded_rng(seed, "history");
    b.history.regions.assign(R, {});
    b.history.window = b.config.history_window;
    const double H = b.config.horizon.minutes;
    for (int k = b.config.history_window; k >= 1; --k) {
        const double minute = b.start_minute - static_cast<double>(k) * H;
        const auto mean = b.demand.mean_at(minute);
        const auto draw = stochastic::sample_demand({mean, b.demand.stddev}, hist);
        const double wrapped = std::fmod(std::fmod(minute, 10080.0) + 10080.0, 10080.0);
        stochastic::DemandRecord rec;
        rec.period_index = -k;
        rec.hour = static_cast<int>(wrapped / 60.0) % 24;
        rec.weekday = static_cast<int>(wrapped / 1440.0) % 7;
        rec.day_of_month = 1 + static_cast<int>(wrapped / 1440.0);
        for (std::size_t j = 0; j < R; ++j) {
            rec.demand = draw[j];
            b.history.append(j, rec);
        }
    }

    auto fleet = seeded_rng(seed, "network/drivers");
    const auto model = synthetic_preference();
    b.drivers.resize(n_drivers);
    for (std::size_t c = 0; c < n_drivers; ++c) {
        auto& d = b.drivers[c];
        d.id = DriverId{c};
        d.region = RegionId{fleet.index(R)};
        d.preference = model;
    }
    b.validate();
    return b;
}

std::vector<behavior::DecisionRecord> planted_decision_corpus(const behavior::PreferenceModel& model,
                                                              std::size_t n_drivers,
                                                              std::size_t decisions_per_driver,
                                                              std::size_t n_candidates, unsigned long long seed) {
    if (n_candidates < 2) throw InputError("a decision needs at least two candidate regions");
    const std::size_t dim = model.feature_dim();
    std::vector<behavior::DecisionRecord> out;
    out.reserve(n_drivers * decisions_per_driver);
    for (std::size_t c = 0; c < n_drivers; ++c) {
        auto rng = seeded_rng(seed, "corpus/" + std::to_string(c));
        for (std::size_t k = 0; k < decisions_per_driver; ++k) {
            behavior::DecisionRecord rec;
            rec.driver = c;
            rec.period = static_cast<long long>(k);
            rec.decision.regions.resize(n_candidates);
            for (auto& r : rec.decision.regions) {
                r.values.resize(dim);
                for (double& v : r.values) v = rng.normal();
            }
            const auto L = behavior::preference_distribution(model, rec.decision.regions);
            rec.decision.chosen = rng.categorical(L);
            out.push_back(std::move(rec));
        }
    }
    return out;
}

namespace {

struct PairStats {
    long long n = 0;
    double minutes = 0.0;
    double minutes_sq = 0.0;
    double km = 0.0;
};

}  // namespace

TripIngest ingest_trip_records(std::istream& in, const std::string& source, const IngestOptions& options) {
    csv::Reader reader(in, source);
    const std::size_t c_from = reader.column("pickup_region");
    const std::size_t c_to = reader.column("dropoff_region");
    const std::size_t c_min = reader.column("minutes");
    const std::size_t c_km = reader.column("km");
    const std::size_t c_hour = reader.column("hour");
    const std::size_t c_day = reader.column("weekday");
    const std::size_t width = std::max({c_from, c_to, c_min, c_km, c_hour, c_day}) + 1;

    struct Trip {
        std::size_t from, to;
        double minutes, km;
        int hour, weekday;
    };
    TripIngest out;
    std::vector<Trip> trips;
    std::vector<std::string> f;
    while (reader.next(f)) {
        ++out.rows;
        try {
            if (f.size() < width) throw InputError("too few fields");
            const long long from = csv::to_integer(f[c_from]);
            const long long to = csv::to_integer(f[c_to]);
            const double minutes = csv::to_double(f[c_min]);
            const double km = csv::to_double(f[c_km]);
            const long long hour = csv::to_integer(f[c_hour]);
            const long long weekday = csv::to_integer(f[c_day]);
            if (from < 0 || to < 0) throw InputError("negative region id");
            if (!(minutes >= 0.0) || !(km >= 0.0) || !std::isfinite(minutes) || !std::isfinite(km)) {
                throw InputError("negative duration or distance");
            }
            if (hour < 0 || hour > 23 || weekday < 0 || weekday > 6) throw InputError("hour or weekday out of range");
            trips.push_back({static_cast<std::size_t>(from), static_cast<std::size_t>(to), minutes, km,
                             static_cast<int>(hour), static_cast<int>(weekday)});
        } catch (const InputError& e) {
            ++out.skipped_rows;
            out.warnings.push_back(source + ":" + std::to_string(reader.line_number()) + ": skipped (" + e.what() + ")");
        }
    }
    if (trips.empty()) throw ScenarioError(source + ": no usable trip records");

    std::size_t R = options.n_regions;
    if (R == 0) {
        for (const auto& t : trips) R = std::max({R, t.from + 1, t.to + 1});
    }
    std::vector<PairStats> stats(R * R);
    std::map<std::pair<int, int>, std::vector<double>> hourly;  // (weekday, hour) -> counts per region
    out.od = Table(R, R);
    for (const auto& t : trips) {
        if (t.from >= R || t.to >= R) {
            ++out.skipped_rows;
            out.warnings.push_back(source + ": trip " + std::to_string(t.from) + "->" + std::to_string(t.to) +
                                   " outside the region range, skipped");
            continue;
        }
        auto& s = stats[t.from * R + t.to];
        ++s.n;
        s.minutes += t.minutes;
        s.minutes_sq += t.minutes * t.minutes;
        s.km += t.km;
        out.od(t.from, t.to) += 1.0;
        auto& counts = hourly[{t.weekday, t.hour}];
        counts.resize(R, 0.0);
        counts[t.from] += 1.0;
    }

    double observed_km = 0.0;
    long long observed_pairs = 0;
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < R; ++j) {
            const auto& s = stats[i * R + j];
            if (i != j && s.n > 0) {
                observed_km += s.km / static_cast<double>(s.n);
                ++observed_pairs;
            }
        }
    }
    const double default_km = observed_pairs > 0 ? observed_km / static_cast<double>(observed_pairs) : options.fallback_km;

    Table dist(R, R), tau(R, R), eps(R, R);
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t j = 0; j < R; ++j) {
            if (i == j) continue;
            const auto* s = &stats[i * R + j];
            if (s->n == 0) {
                ++out.fallback_pairs;
                const auto& rev = stats[j * R + i];
                if (rev.n > 0) {
                    s = &rev;
                    out.warnings.push_back(source + ": no trips " + std::to_string(i) + "->" + std::to_string(j) +
                                           ", using the reverse direction");
                } else {
                    dist(i, j) = default_km;
                    tau(i, j) = default_km / options.fallback_speed;
                    out.warnings.push_back(source + ": no trips between " + std::to_string(i) + " and " +
                                           std::to_string(j) + ", using distance/speed defaults");
                    continue;
                }
            }
            const double n = static_cast<double>(s->n);
            const double mean = s->minutes / n;
            dist(i, j) = s->km / n;
            tau(i, j) = mean;
            eps(i, j) = std::sqrt(std::max(0.0, s->minutes_sq / n - mean * mean));
        }
    }
    out.graph = RegionGraph(dist, tau, eps);

    for (std::size_t i = 0; i < R; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < R; ++j) total += out.od(i, j);
        for (std::size_t j = 0; j < R; ++j) {
            out.od(i, j) = total > 0.0 ? out.od(i, j) / total : 1.0 / static_cast<double>(R);
        }
    }

    out.history.regions.assign(R, {});
    out.history.window = 168;
    for (const auto& [slot, counts] : hourly) {
        stochastic::DemandRecord rec;
        rec.weekday = slot.first;
        rec.hour = slot.second;
        rec.period_index = slot.first * 24 + slot.second;
        rec.day_of_month = 1 + slot.first;
        for (std::size_t j = 0; j < R; ++j) {
            rec.demand = counts[j];
            out.history.append(j, rec);
        }
    }
    return out;
}

TripIngest ingest_trip_records(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open " + path.string());
    return ingest_trip_records(in, path.string(), options);
}

}  // namespace aavr
