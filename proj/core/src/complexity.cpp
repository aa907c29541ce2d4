#include "xledger/complexity.hpp"

#include <json.hpp>
#include <stdexcept>

#include "xledger/netsim.hpp"

namespace xledger {

std::uint64_t rounds_formula(Protocol protocol, std::uint64_t k) {
    switch (protocol) {
        case Protocol::Xlpn22: return 5;
        case Protocol::Vldb20: return 12;
        case Protocol::Podc18: return 10 * k;
    }
    return 0;
}

std::uint64_t messages_formula(Protocol protocol, std::uint64_t k, std::uint64_t n) {
    switch (protocol) {
        case Protocol::Podc18: return 4 * k * n * n + 4 * k * n + 4;
        case Protocol::Vldb20: return 4 * k * n * n + 4 * k * n + 4 * k;
        case Protocol::Xlpn22: return 4 * k * n * n + 3 * k * n + 4 * k - 3;
    }
    return 0;
}

std::uint64_t podc18_derived_messages(std::uint64_t k, std::uint64_t n) { return 2 * k * (2 * n * n + 2 * n + 2); }

std::uint64_t pbft_message_count(std::uint64_t n) { return n + n * n + n * n + n; }

XlpnComponents xlpn22_component_formulas(std::uint64_t k, std::uint64_t n) {
    return {2 * k * (2 * n * n + 2), 3 * (k * n - 1)};
}

ComplexityRow complexity_row(Protocol protocol, std::uint64_t k, std::uint64_t n) {
    return {protocol, k, n, rounds_formula(protocol, k), messages_formula(protocol, k, n)};
}

std::string_view to_string(Verdict v) { return v == Verdict::Exact ? "EXACT" : "DOCUMENTED_DELTA"; }

const ComponentDelta* ReconcileReport::component(std::string_view name) const {
    for (const auto& c : components) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

ComponentDelta make_component(std::string name, std::uint64_t counted, std::uint64_t formula) {
    auto c = static_cast<std::int64_t>(counted);
    auto f = static_cast<std::int64_t>(formula);
    return {std::move(name), c, f, c - f};
}

}  // namespace

ReconcileReport reconcile(const RunMetrics& metrics, Protocol protocol, std::uint64_t k, std::uint64_t n) {
    ReconcileReport report;
    report.protocol = protocol;
    report.k = k;
    report.n = n;
    auto& out = report.components;
    out.push_back(make_component("rounds", metrics.rounds, rounds_formula(protocol, k)));

    const std::uint64_t pbft = metrics.messages_in({Phase::PrePrepare, Phase::Prepare, Phase::PbftCommit, Phase::Reply});
    switch (protocol) {
        case Protocol::Xlpn22: {
            auto parts = xlpn22_component_formulas(k, n);
            out.push_back(make_component("inter", metrics.messages_in({Phase::VoteReq, Phase::Ready, Phase::CommitReq}),
                                         parts.inter));
            out.push_back(make_component("intra", metrics.messages_in({Phase::VotePrep, Phase::Commit}), parts.intra));
            break;
        }
        case Protocol::Vldb20:
            out.push_back(make_component("2pc", metrics.messages_in({Phase::TwoPcVote, Phase::TwoPcDecide}), 4 * k));
            out.push_back(make_component("pbft", pbft, 2 * k * pbft_message_count(n)));
            break;
        case Protocol::Podc18:
            out.push_back(make_component("hops", metrics.messages_in({Phase::HopFwd, Phase::HopBwd}), 4 * k));
            out.push_back(make_component("pbft", pbft, 2 * k * pbft_message_count(n)));
            break;
    }
    out.push_back(make_component("total", metrics.messages_total, messages_formula(protocol, k, n)));

    report.verdict = Verdict::Exact;
    for (const auto& c : out) {
        if (c.delta != 0) report.verdict = Verdict::DocumentedDelta;
    }
    return report;
}

std::int64_t ExpectedDelta::evaluate(std::uint64_t k, std::uint64_t n) const {
    auto sk = static_cast<std::int64_t>(k);
    auto sn = static_cast<std::int64_t>(n);
    return k_coef * sk + n_coef * sn + kn_coef * sk * sn + constant;
}

std::vector<ExpectedDelta> parse_expectations(std::string_view json_text) {
    std::vector<ExpectedDelta> out;
    try {
        const auto doc = nlohmann::json::parse(json_text);
        for (const auto& entry : doc.at("expected_deltas")) {
            ExpectedDelta d;
            auto protocol = parse_protocol(entry.at("protocol").get<std::string>());
            if (!protocol) throw std::invalid_argument("expectations: unknown protocol");
            d.protocol = *protocol;
            d.component = entry.at("component").get<std::string>();
            const auto& delta = entry.at("delta");
            d.k_coef = delta.value("k", std::int64_t{0});
            d.n_coef = delta.value("n", std::int64_t{0});
            d.kn_coef = delta.value("kn", std::int64_t{0});
            d.constant = delta.value("const", std::int64_t{0});
            out.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("expectations: ") + e.what());
    }
    return out;
}

std::vector<ComponentDelta> unexpected_deltas(const ReconcileReport& report,
                                              const std::vector<ExpectedDelta>& expectations) {
    std::vector<ComponentDelta> out;
    for (const auto& c : report.components) {
        std::int64_t expected = 0;
        for (const auto& e : expectations) {
            if (e.protocol == report.protocol && e.component == c.name) expected = e.evaluate(report.k, report.n);
        }
        if (c.delta != expected) out.push_back(c);
    }
    return out;
}

}  // namespace xledger
