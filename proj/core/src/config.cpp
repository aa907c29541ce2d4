#include "xledger/config.hpp"

#include <json.hpp>

namespace xledger {

using nlohmann::json;

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Silent: return "SILENT";
        case StrategyKind::WrongVote: return "WRONG_VOTE";
        case StrategyKind::Equivocate: return "EQUIVOCATE";
        case StrategyKind::Omit: return "OMIT";
    }
    return "?";
}

ConfigError::ConfigError(std::string field, std::string reason)
    : std::runtime_error("config error in '" + field + "': " + reason),
      field_(std::move(field)),
      reason_(std::move(reason)) {}

namespace {

void check_node(const ClusterConfig& cfg, NodeId id, const std::string& field) {
    if (id.ledger >= cfg.k || id.rank >= cfg.n) {
        throw ConfigError(field, "node " + to_string(id) + " is outside the " + std::to_string(cfg.k) + "x" +
                                     std::to_string(cfg.n) + " cluster");
    }
}

}  // namespace

ClusterConfig validate_config(ClusterConfig cfg) {
    if (cfg.k < 2) throw ConfigError("k", "a cross-ledger transaction needs at least 2 ledgers");
    if (cfg.n < 4) throw ConfigError("n", "each ledger needs at least 4 nodes");
    if (cfg.f > max_faulty(cfg.n)) {
        throw ConfigError("f", "f=" + std::to_string(cfg.f) + " violates n >= 3f+1 for n=" + std::to_string(cfg.n));
    }
    if (cfg.initiator_ledger >= cfg.k) throw ConfigError("initiator_ledger", "no such ledger");
    if (cfg.witness_ledger >= cfg.k) throw ConfigError("witness_ledger", "no such ledger");
    if (cfg.timelock_rounds == 0) throw ConfigError("timelock_rounds", "must be positive");
    for (const auto& [id, strategy] : cfg.fault_plan.byzantine) {
        check_node(cfg, id, "fault_plan.byzantine");
        for (auto t : strategy.targets) check_node(cfg, t, "fault_plan.byzantine.targets");
        if (strategy.kind != StrategyKind::Omit && !strategy.targets.empty()) {
            throw ConfigError("fault_plan.byzantine", "targets are only meaningful for OMIT");
        }
    }
    for (const auto& [id, round] : cfg.fault_plan.crash_at) {
        check_node(cfg, id, "fault_plan.crash_at");
    }
    return cfg;
}

std::vector<LedgerIndex> over_budget_ledgers(const ClusterConfig& cfg) {
    std::vector<std::set<std::uint32_t>> faulty(cfg.k);
    for (const auto& [id, s] : cfg.fault_plan.byzantine) {
        if (id.ledger < cfg.k) faulty[id.ledger].insert(id.rank);
    }
    for (const auto& [id, r] : cfg.fault_plan.crash_at) {
        if (id.ledger < cfg.k) faulty[id.ledger].insert(id.rank);
    }
    if (cfg.fault_plan.initiator_fails_at && cfg.initiator_ledger < cfg.k) {
        faulty[cfg.initiator_ledger].insert(0);
    }
    std::vector<LedgerIndex> out;
    for (LedgerIndex l = 0; l < cfg.k; ++l) {
        if (faulty[l].size() > cfg.f) out.push_back(l);
    }
    return out;
}

namespace {

NodeId node_key(const std::string& text, const std::string& field) {
    auto id = parse_node_id(text);
    if (!id) throw ConfigError(field, "bad node id '" + text + "'");
    return *id;
}

std::uint64_t read_uint(const json& j, const std::string& field) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw ConfigError(field, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

std::uint32_t read_u32(const json& j, const std::string& field) {
    auto v = read_uint(j, field);
    if (v > 0xffffffffULL) throw ConfigError(field, "value out of range");
    return static_cast<std::uint32_t>(v);
}

ByzantineStrategy parse_strategy(const json& j, const std::string& field) {
    ByzantineStrategy s;
    std::string name;
    if (j.is_string()) {
        name = j.get<std::string>();
    } else if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            if (key == "strategy") {
                if (!value.is_string()) throw ConfigError(field, "strategy must be a string");
                name = value.get<std::string>();
            } else if (key == "targets") {
                if (!value.is_array()) throw ConfigError(field, "targets must be an array");
                for (const auto& t : value) {
                    if (!t.is_string()) throw ConfigError(field, "target must be a node id string");
                    s.targets.insert(node_key(t.get<std::string>(), field));
                }
            } else {
                throw ConfigError(field, "unknown key '" + key + "'");
            }
        }
    } else {
        throw ConfigError(field, "expected a strategy name or object");
    }
    if (name == "SILENT") {
        s.kind = StrategyKind::Silent;
    } else if (name == "WRONG_VOTE") {
        s.kind = StrategyKind::WrongVote;
    } else if (name == "EQUIVOCATE") {
        s.kind = StrategyKind::Equivocate;
    } else if (name == "OMIT") {
        s.kind = StrategyKind::Omit;
    } else {
        throw ConfigError(field, "unknown strategy '" + name + "'");
    }
    return s;
}

FaultPlan parse_fault_plan(const json& j) {
    FaultPlan plan;
    if (j.is_null()) return plan;
    if (!j.is_object()) throw ConfigError("fault_plan", "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "byzantine") {
            if (!value.is_object()) throw ConfigError("fault_plan.byzantine", "expected an object");
            for (const auto& [node, strategy] : value.items()) {
                plan.byzantine[node_key(node, "fault_plan.byzantine")] =
                    parse_strategy(strategy, "fault_plan.byzantine." + node);
            }
        } else if (key == "crash_at") {
            if (!value.is_object()) throw ConfigError("fault_plan.crash_at", "expected an object");
            for (const auto& [node, round] : value.items()) {
                plan.crash_at[node_key(node, "fault_plan.crash_at")] = read_uint(round, "fault_plan.crash_at." + node);
            }
        } else if (key == "initiator_fails_at") {
            if (!value.is_null()) plan.initiator_fails_at = read_uint(value, "fault_plan.initiator_fails_at");
        } else {
            throw ConfigError("fault_plan", "unknown key '" + key + "'");
        }
    }
    return plan;
}

}  // namespace

ClusterConfig config_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("document", e.what());
    }
    if (!doc.is_object()) throw ConfigError("document", "expected a JSON object");

    ClusterConfig cfg;
    bool have_f = false;
    for (const auto& [key, value] : doc.items()) {
        if (key == "k") {
            cfg.k = read_u32(value, key);
        } else if (key == "n") {
            cfg.n = read_u32(value, key);
        } else if (key == "f") {
            cfg.f = read_u32(value, key);
            have_f = true;
        } else if (key == "seed") {
            cfg.seed = read_uint(value, key);
        } else if (key == "fault_plan") {
            cfg.fault_plan = parse_fault_plan(value);
        } else if (key == "initiator_ledger") {
            cfg.initiator_ledger = read_u32(value, key);
        } else if (key == "witness_ledger") {
            cfg.witness_ledger = read_u32(value, key);
        } else if (key == "timelock_rounds") {
            cfg.timelock_rounds = read_u32(value, key);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    if (!have_f) cfg.f = max_faulty(cfg.n);
    return validate_config(cfg);
}

std::string config_to_json(const ClusterConfig& cfg) {
    json plan = json::object();
    json byz = json::object();
    for (const auto& [id, s] : cfg.fault_plan.byzantine) {
        json entry{{"strategy", std::string(to_string(s.kind))}};
        if (!s.targets.empty()) {
            json targets = json::array();
            for (auto t : s.targets) targets.push_back(to_string(t));
            entry["targets"] = targets;
        }
        byz[to_string(id)] = entry;
    }
    json crash = json::object();
    for (const auto& [id, r] : cfg.fault_plan.crash_at) crash[to_string(id)] = r;
    plan["byzantine"] = byz;
    plan["crash_at"] = crash;
    if (cfg.fault_plan.initiator_fails_at) plan["initiator_fails_at"] = *cfg.fault_plan.initiator_fails_at;

    json doc{{"k", cfg.k},
             {"n", cfg.n},
             {"f", cfg.f},
             {"seed", cfg.seed},
             {"fault_plan", plan},
             {"initiator_ledger", cfg.initiator_ledger},
             {"witness_ledger", cfg.witness_ledger},
             {"timelock_rounds", cfg.timelock_rounds}};
    return doc.dump(2);
}

}  // namespace xledger
