#include "xledger/types.hpp"

#include <charconv>

namespace xledger {

std::string to_string(NodeId id) {
    if (id.ledger < 26) {
        return std::string(1, static_cast<char>('A' + id.ledger)) + std::to_string(id.rank);
    }
    return "L" + std::to_string(id.ledger) + "." + std::to_string(id.rank);
}

namespace {

std::optional<std::uint32_t> parse_u32(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::optional<NodeId> parse_node_id(std::string_view text) {
    if (text.size() < 2) return std::nullopt;
    if (text.front() == 'L') {
        auto dot = text.find('.');
        if (dot == std::string_view::npos) return std::nullopt;
        auto ledger = parse_u32(text.substr(1, dot - 1));
        auto rank = parse_u32(text.substr(dot + 1));
        if (!ledger || !rank) return std::nullopt;
        return NodeId{*ledger, *rank};
    }
    if (text.front() < 'A' || text.front() > 'Z') return std::nullopt;
    auto rank = parse_u32(text.substr(1));
    if (!rank) return std::nullopt;
    return NodeId{static_cast<LedgerIndex>(text.front() - 'A'), *rank};
}

std::string_view to_string(Vote v) { return v == Vote::Commit ? "COMMIT" : "ROLLBACK"; }

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::Xlpn22: return "xlpn22";
        case Protocol::Vldb20: return "vldb20";
        case Protocol::Podc18: return "podc18";
    }
    return "?";
}

std::optional<Protocol> parse_protocol(std::string_view text) {
    for (auto p : kAllProtocols) {
        if (to_string(p) == text) return p;
    }
    return std::nullopt;
}

}  // namespace xledger
