// Closed-form round and message counts for the three protocols, and the
// reconciliation of simulated counts against them.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xledger/types.hpp"

namespace xledger {

struct RunMetrics;

struct ComplexityRow {
    Protocol protocol = Protocol::Xlpn22;
    std::uint64_t k = 0;
    std::uint64_t n = 0;
    std::uint64_t rounds = 0;
    std::uint64_t messages = 0;

    bool operator==(const ComplexityRow&) const = default;
};

/// Failure-free rounds: 5, 12, 10k.
std::uint64_t rounds_formula(Protocol protocol, std::uint64_t k);

/// Total messages exactly as tabulated:
///   PODC-18  4kn^2 + 4kn + 4
///   VLDB-20  4kn^2 + 4kn + 4k
///   XLPN-22  4kn^2 + 3kn + 4k - 3
std::uint64_t messages_formula(Protocol protocol, std::uint64_t k, std::uint64_t n);

/// PODC-18 total from its per-swap derivation, 2k(2n^2 + 2n + 2). Differs
/// from the tabulated total by 4k - 4.
std::uint64_t podc18_derived_messages(std::uint64_t k, std::uint64_t n);

/// Messages of one PBFT execution: n + n^2 + n^2 + n.
std::uint64_t pbft_message_count(std::uint64_t n);

struct XlpnComponents {
    std::uint64_t intra = 0;  // 4kn^2 + 4k
    std::uint64_t inter = 0;  // 3kn - 3
};
XlpnComponents xlpn22_component_formulas(std::uint64_t k, std::uint64_t n);

ComplexityRow complexity_row(Protocol protocol, std::uint64_t k, std::uint64_t n);

enum class Verdict : std::uint8_t { Exact, DocumentedDelta };
std::string_view to_string(Verdict v);

struct ComponentDelta {
    std::string name;
    std::int64_t counted = 0;
    std::int64_t formula = 0;
    std::int64_t delta = 0;  // counted - formula
};

struct ReconcileReport {
    Protocol protocol = Protocol::Xlpn22;
    std::uint64_t k = 0;
    std::uint64_t n = 0;
    std::vector<ComponentDelta> components;
    Verdict verdict = Verdict::Exact;

    const ComponentDelta* component(std::string_view name) const;
};

/// Maps the simulated per-phase totals of one failure-free transaction onto
/// the formula components ("rounds", "inter"/"intra", "2pc"/"hops", "pbft",
/// "total").
ReconcileReport reconcile(const RunMetrics& metrics, Protocol protocol, std::uint64_t k, std::uint64_t n);

/// An expected non-zero delta, linear in k, n, kn:
/// delta = k_coef*k + n_coef*n + kn_coef*k*n + constant.
struct ExpectedDelta {
    Protocol protocol = Protocol::Xlpn22;
    std::string component;
    std::int64_t k_coef = 0;
    std::int64_t n_coef = 0;
    std::int64_t kn_coef = 0;
    std::int64_t constant = 0;

    std::int64_t evaluate(std::uint64_t k, std::uint64_t n) const;
};

/// Parses the committed expectations file (JSON); throws std::invalid_argument.
std::vector<ExpectedDelta> parse_expectations(std::string_view json_text);

/// Deltas in the report that are neither zero nor listed as expected.
std::vector<ComponentDelta> unexpected_deltas(const ReconcileReport& report,
                                              const std::vector<ExpectedDelta>& expectations);

}  // namespace xledger
