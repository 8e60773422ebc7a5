#include "aavr/serialize.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "aavr/csv.hpp"

namespace aavr::io {

using nlohmann::json;

namespace {

template <class T>
void read_key(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

json table_to_json(const Table& t) {
    json rows = json::array();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Table table_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw ScenarioError(std::string(what) + " must be an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j.at(0).size() : 0;
    Table t(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j.at(r).size() != cols) throw ScenarioError(std::string(what) + " rows differ in length");
        for (std::size_t c = 0; c < cols; ++c) t(r, c) = j.at(r).at(c).get<double>();
    }
    return t;
}

}  // namespace

ScenarioConfig config_from_json(const json& j, const ScenarioConfig& base) {
    if (!j.is_object()) throw ScenarioError("config must be a JSON object");
    static const std::set<std::string> known{
        "horizon", "beta", "rho", "gamma", "b4_beta", "epsilon0", "epsilon1", "M", "fare_base", "fare_per_km",
        "cost_per_km", "commission_rate", "seed", "b2_literal_sign", "literal_net_flow", "aavr_tiebreak",
        "demand_multiplier", "history_window", "min_trip_minutes", "min_trip_km", "node_limit",
        "mip_relative_gap"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ScenarioError("config: unknown key '" + key + "'");
    }
    ScenarioConfig c = base;
    try {
        read_key(j, "horizon", c.horizon.minutes);
        read_key(j, "beta", c.beta);
        read_key(j, "rho", c.rho);
        if (j.contains("gamma")) {
            if (j.at("gamma").is_null()) {
                c.gamma.reset();
            } else {
                c.gamma = j.at("gamma").get<double>();
            }
        }
        read_key(j, "b4_beta", c.b4_beta);
        read_key(j, "epsilon0", c.epsilon0);
        read_key(j, "epsilon1", c.epsilon1);
        read_key(j, "M", c.M);
        read_key(j, "fare_base", c.fare_base);
        read_key(j, "fare_per_km", c.fare_per_km);
        read_key(j, "cost_per_km", c.cost_per_km);
        read_key(j, "commission_rate", c.commission_rate);
        read_key(j, "seed", c.seed);
        read_key(j, "b2_literal_sign", c.b2_literal_sign);
        read_key(j, "literal_net_flow", c.literal_net_flow);
        read_key(j, "aavr_tiebreak", c.aavr_tiebreak);
        read_key(j, "demand_multiplier", c.demand_multiplier);
        read_key(j, "history_window", c.history_window);
        read_key(j, "min_trip_minutes", c.min_trip_minutes);
        read_key(j, "min_trip_km", c.min_trip_km);
        read_key(j, "node_limit", c.node_limit);
        read_key(j, "mip_relative_gap", c.mip_relative_gap);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("config: ") + e.what());
    }
    try {
        c.validate();
    } catch (const InputError& e) {
        throw ScenarioError(e.what());
    }
    return c;
}

json config_to_json(const ScenarioConfig& c) {
    json j;
    j["horizon"] = c.horizon.minutes;
    j["beta"] = c.beta;
    j["rho"] = c.rho;
    j["gamma"] = c.gamma ? json(*c.gamma) : json();
    j["b4_beta"] = c.b4_beta;
    j["epsilon0"] = c.epsilon0;
    j["epsilon1"] = c.epsilon1;
    j["M"] = c.M;
    j["fare_base"] = c.fare_base;
    j["fare_per_km"] = c.fare_per_km;
    j["cost_per_km"] = c.cost_per_km;
    j["commission_rate"] = c.commission_rate;
    j["seed"] = c.seed;
    j["b2_literal_sign"] = c.b2_literal_sign;
    j["literal_net_flow"] = c.literal_net_flow;
    j["aavr_tiebreak"] = c.aavr_tiebreak;
    j["demand_multiplier"] = c.demand_multiplier;
    j["history_window"] = c.history_window;
    j["min_trip_minutes"] = c.min_trip_minutes;
    j["min_trip_km"] = c.min_trip_km;
    j["node_limit"] = c.node_limit;
    j["mip_relative_gap"] = c.mip_relative_gap;
    return j;
}

ScenarioConfig load_config(const std::filesystem::path& path, const ScenarioConfig& base) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
    return config_from_json(j, base);
}

json bundle_to_json(const ScenarioBundle& b) {
    json j;
    j["name"] = b.name;
    j["start_minute"] = b.start_minute;
    j["config"] = config_to_json(b.config);
    j["distance_km"] = table_to_json(b.graph.distance_table());
    j["travel_minutes"] = table_to_json(b.graph.travel_time_table());
    j["travel_stddev"] = table_to_json(b.graph.travel_stddev_table());
    j["od"] = table_to_json(b.od);
    j["demand"] = {{"mean", table_to_json(b.demand.mean)},
                   {"stddev", b.demand.stddev},
                   {"slot_minutes", b.demand.slot_minutes}};
    json drivers = json::array();
    for (const auto& d : b.drivers) {
        json jd;
        jd["id"] = d.id.index;
        jd["region"] = d.region.index;
        jd["weights"] = d.preference.weights;
        jd["system"] = {d.belief_system.alpha, d.belief_system.beta};
        jd["self"] = {d.belief_self.alpha, d.belief_self.beta};
        if (d.pinned_mu) jd["mu"] = *d.pinned_mu;
        if (d.pinned_preference) jd["preference"] = *d.pinned_preference;
        drivers.push_back(std::move(jd));
    }
    j["drivers"] = std::move(drivers);
    json history = json::object();
    history["window"] = b.history.window;
    json regions = json::array();
    for (const auto& series : b.history.regions) {
        json rows = json::array();
        for (const auto& r : series) rows.push_back({r.period_index, r.hour, r.weekday, r.day_of_month, r.demand});
        regions.push_back(std::move(rows));
    }
    history["regions"] = std::move(regions);
    j["history"] = std::move(history);
    return j;
}

ScenarioBundle bundle_from_json(const json& j) {
    ScenarioBundle b;
    try {
        b.name = j.at("name").get<std::string>();
        b.start_minute = j.value("start_minute", 0.0);
        b.config = config_from_json(j.at("config"));
        b.graph = RegionGraph(table_from_json(j.at("distance_km"), "distance_km"),
                              table_from_json(j.at("travel_minutes"), "travel_minutes"),
                              table_from_json(j.at("travel_stddev"), "travel_stddev"));
        b.od = table_from_json(j.at("od"), "od");
        const auto& dm = j.at("demand");
        b.demand.mean = table_from_json(dm.at("mean"), "demand.mean");
        b.demand.stddev = dm.at("stddev").get<std::vector<double>>();
        b.demand.slot_minutes = dm.value("slot_minutes", 60.0);
        for (const auto& jd : j.at("drivers")) {
            behavior::DriverAgent d;
            d.id = DriverId{jd.at("id").get<std::size_t>()};
            d.region = RegionId{jd.at("region").get<std::size_t>()};
            d.preference.weights = jd.value("weights", std::vector<double>{});
            const auto sys = jd.at("system").get<std::vector<double>>();
            const auto self = jd.at("self").get<std::vector<double>>();
            if (sys.size() != 2 || self.size() != 2) throw ScenarioError("driver beliefs need two parameters");
            d.belief_system = {sys[0], sys[1]};
            d.belief_self = {self[0], self[1]};
            if (jd.contains("mu")) d.pinned_mu = jd.at("mu").get<double>();
            if (jd.contains("preference")) d.pinned_preference = jd.at("preference").get<std::vector<double>>();
            b.drivers.push_back(std::move(d));
        }
        if (j.contains("history")) {
            const auto& h = j.at("history");
            b.history.window = h.value("window", 168);
            for (const auto& series : h.at("regions")) {
                std::vector<stochastic::DemandRecord> rows;
                for (const auto& r : series) {
                    rows.push_back({r.at(0).get<long long>(), r.at(1).get<int>(), r.at(2).get<int>(),
                                    r.at(3).get<int>(), r.at(4).get<double>()});
                }
                b.history.regions.push_back(std::move(rows));
            }
        }
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario bundle: ") + e.what());
    } catch (const InputError& e) {
        throw ScenarioError(std::string("scenario bundle: ") + e.what());
    }
    b.validate();
    return b;
}

void save_bundle(const ScenarioBundle& bundle, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ScenarioError("cannot write " + path.string());
    out << bundle_to_json(bundle).dump(1) << '\n';
}

ScenarioBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
    return bundle_from_json(j);
}

namespace {

std::string where(const csv::Reader& r) { return r.source() + ":" + std::to_string(r.line_number()); }

template <class F>
auto parse_field(const csv::Reader& r, F&& f) {
    try {
        return f();
    } catch (const InputError& e) {
        throw ScenarioError(where(r) + ": " + e.what());
    }
}

/// Columns named prefix0, prefix1, ... in order.
std::vector<std::size_t> numbered_columns(const csv::Reader& r, const std::string& prefix) {
    std::vector<std::size_t> cols;
    for (std::size_t k = 0;; ++k) {
        const std::string name = prefix + std::to_string(k);
        if (!r.has_column(name)) break;
        cols.push_back(r.column(name));
    }
    return cols;
}

}  // namespace

std::vector<behavior::DriverAgent> read_drivers_csv(std::istream& in, const std::string& source) {
    csv::Reader r(in, source);
    const std::size_t c_id = r.column("driver_id"), c_region = r.column("region");
    const std::size_t c_ar = r.column("alpha_r"), c_br = r.column("beta_r");
    const std::size_t c_ap = r.column("alpha_p"), c_bp = r.column("beta_p");
    const auto c_w = numbered_columns(r, "w_");
    std::vector<behavior::DriverAgent> drivers;
    std::vector<std::string> f;
    while (r.next(f)) {
        if (f.size() != r.header().size()) throw ScenarioError(where(r) + ": expected " + std::to_string(r.header().size()) + " fields");
        parse_field(r, [&] {
            behavior::DriverAgent d;
            d.id = DriverId{static_cast<std::size_t>(csv::to_integer(f[c_id]))};
            d.region = RegionId{static_cast<std::size_t>(csv::to_integer(f[c_region]))};
            d.belief_system = {csv::to_double(f[c_ar]), csv::to_double(f[c_br])};
            d.belief_self = {csv::to_double(f[c_ap]), csv::to_double(f[c_bp])};
            for (auto c : c_w) d.preference.weights.push_back(csv::to_double(f[c]));
            if (d.belief_system.alpha <= 0 || d.belief_system.beta <= 0 || d.belief_self.alpha <= 0 ||
                d.belief_self.beta <= 0) {
                throw InputError("belief parameters must be positive");
            }
            drivers.push_back(std::move(d));
            return 0;
        });
    }
    return drivers;
}

void write_drivers_csv(std::ostream& out, const std::vector<behavior::DriverAgent>& drivers) {
    std::size_t dim = 0;
    for (const auto& d : drivers) dim = std::max(dim, d.preference.weights.size());
    csv::Writer w(out);
    std::vector<std::string> header{"driver_id", "region", "alpha_r", "beta_r", "alpha_p", "beta_p"};
    for (std::size_t k = 0; k < dim; ++k) header.push_back("w_" + std::to_string(k));
    w.row(header);
    for (const auto& d : drivers) {
        std::vector<std::string> row{std::to_string(d.id.index), std::to_string(d.region.index),
                                     csv::format(d.belief_system.alpha), csv::format(d.belief_system.beta),
                                     csv::format(d.belief_self.alpha), csv::format(d.belief_self.beta)};
        for (std::size_t k = 0; k < dim; ++k) {
            row.push_back(k < d.preference.weights.size() ? csv::format(d.preference.weights[k]) : "0");
        }
        w.row(row);
    }
}

stochastic::DemandHistory read_demand_csv(std::istream& in, const std::string& source) {
    csv::Reader r(in, source);
    const std::size_t c_region = r.column("region_id"), c_period = r.column("period_index");
    const std::size_t c_hour = r.column("hour"), c_day = r.column("weekday");
    const std::size_t c_dom = r.column("day_of_month"), c_demand = r.column("demand");
    stochastic::DemandHistory h;
    std::vector<std::string> f;
    while (r.next(f)) {
        if (f.size() != r.header().size()) throw ScenarioError(where(r) + ": expected " + std::to_string(r.header().size()) + " fields");
        parse_field(r, [&] {
            const long long region = csv::to_integer(f[c_region]);
            if (region < 0) throw InputError("negative region id");
            stochastic::DemandRecord rec;
            rec.period_index = csv::to_integer(f[c_period]);
            rec.hour = static_cast<int>(csv::to_integer(f[c_hour]));
            rec.weekday = static_cast<int>(csv::to_integer(f[c_day]));
            rec.day_of_month = static_cast<int>(csv::to_integer(f[c_dom]));
            rec.demand = csv::to_double(f[c_demand]);
            if (rec.demand < 0.0) throw InputError("negative demand");
            h.append(static_cast<std::size_t>(region), rec);
            return 0;
        });
    }
    return h;
}

void write_demand_csv(std::ostream& out, const stochastic::DemandHistory& h) {
    csv::Writer w(out);
    w.row({"region_id", "period_index", "hour", "weekday", "day_of_month", "demand"});
    for (std::size_t j = 0; j < h.regions.size(); ++j) {
        for (const auto& r : h.regions[j]) {
            w.row({std::to_string(j), std::to_string(r.period_index), std::to_string(r.hour), std::to_string(r.weekday),
                   std::to_string(r.day_of_month), csv::format(r.demand)});
        }
    }
}

std::vector<behavior::DecisionRecord> read_decisions_csv(std::istream& in, const std::string& source) {
    csv::Reader r(in, source);
    const std::size_t c_id = r.column("driver_id"), c_period = r.column("period");
    const std::size_t c_chosen = r.column("chosen_region"), c_region = r.column("region");
    const auto c_f = numbered_columns(r, "f_");
    if (c_f.empty()) throw ScenarioError(source + ": no feature columns f_0..f_k");

    // Rows grouped by (driver, period) in file order.
    std::map<std::pair<std::size_t, long long>, std::size_t> slot;
    std::vector<behavior::DecisionRecord> out;
    std::vector<std::vector<std::size_t>> region_ids;
    std::vector<std::size_t> chosen_ids;
    std::vector<std::string> f;
    while (r.next(f)) {
        if (f.size() != r.header().size()) throw ScenarioError(where(r) + ": expected " + std::to_string(r.header().size()) + " fields");
        parse_field(r, [&] {
            const auto driver = static_cast<std::size_t>(csv::to_integer(f[c_id]));
            const long long period = csv::to_integer(f[c_period]);
            const auto chosen = static_cast<std::size_t>(csv::to_integer(f[c_chosen]));
            const auto region = static_cast<std::size_t>(csv::to_integer(f[c_region]));
            behavior::RegionFeatures feat;
            for (auto c : c_f) feat.values.push_back(csv::to_double(f[c]));
            auto [it, fresh] = slot.try_emplace({driver, period}, out.size());
            if (fresh) {
                out.push_back({driver, period, {}});
                region_ids.emplace_back();
                chosen_ids.push_back(chosen);
            } else if (chosen_ids[it->second] != chosen) {
                throw InputError("chosen_region differs within one decision");
            }
            out[it->second].decision.regions.push_back(std::move(feat));
            region_ids[it->second].push_back(region);
            return 0;
        });
    }
    if (out.empty()) throw ScenarioError(source + ": no decisions");
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& ids = region_ids[k];
        std::size_t pos = ids.size();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] == chosen_ids[k]) pos = i;
        }
        if (pos == ids.size()) {
            throw ScenarioError(source + ": decision of driver " + std::to_string(out[k].driver) + " in period " +
                                std::to_string(out[k].period) + " has no row for its chosen region");
        }
        out[k].decision.chosen = pos;
    }
    return out;
}

void write_decisions_csv(std::ostream& out, const std::vector<behavior::DecisionRecord>& decisions) {
    std::size_t dim = 0;
    for (const auto& d : decisions) {
        for (const auto& r : d.decision.regions) dim = std::max(dim, r.values.size());
    }
    csv::Writer w(out);
    std::vector<std::string> header{"driver_id", "period", "chosen_region", "region"};
    for (std::size_t k = 0; k < dim; ++k) header.push_back("f_" + std::to_string(k));
    w.row(header);
    for (const auto& d : decisions) {
        for (std::size_t j = 0; j < d.decision.regions.size(); ++j) {
            std::vector<std::string> row{std::to_string(d.driver), std::to_string(d.period),
                                         std::to_string(d.decision.chosen), std::to_string(j)};
            for (std::size_t k = 0; k < dim; ++k) {
                const auto& v = d.decision.regions[j].values;
                row.push_back(k < v.size() ? csv::format(v[k]) : "0");
            }
            w.row(row);
        }
    }
}

void write_trips_csv(std::ostream& out, const std::vector<TripRecord>& trips) {
    csv::Writer w(out);
    w.row({"pickup_region", "dropoff_region", "minutes", "km", "hour", "weekday"});
    for (const auto& t : trips) {
        w.row({std::to_string(t.pickup_region), std::to_string(t.dropoff_region), csv::format(t.minutes),
               csv::format(t.km), std::to_string(t.hour), std::to_string(t.weekday)});
    }
}

void write_table_csv(std::ostream& out, const Table& table, const std::string& value_name) {
    csv::Writer w(out);
    w.row({"from", "to", value_name});
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            w.row({std::to_string(i), std::to_string(j), csv::format(table(i, j))});
        }
    }
}

}  // namespace aavr::io
