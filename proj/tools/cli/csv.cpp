#include "cli/csv.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace xledger::cli {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

template <typename T>
T number(std::string_view field) {
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw std::invalid_argument("bad CSV number '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

std::string format_row(const CsvRow& r) {
    std::ostringstream os;
    os << to_string(r.protocol) << ',' << r.k << ',' << r.n << ',' << r.f << ',' << r.txn_count << ','
       << r.rounds_total << ',' << r.messages_total << ',' << r.sim_time_units << ',' << r.decision_commit_count << ','
       << r.decision_rollback_count << ',' << r.seed;
    return os.str();
}

std::string format_csv(const std::vector<CsvRow>& rows) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += format_row(r);
        out += '\n';
    }
    return out;
}

std::vector<CsvRow> parse_csv(std::string_view text) {
    std::vector<CsvRow> rows;
    bool header = true;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (header) {
            if (line != kCsvHeader) throw std::invalid_argument("unexpected CSV header");
            header = false;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 11) throw std::invalid_argument("CSV row needs 11 fields: " + std::string(line));
        CsvRow r;
        const auto protocol = parse_protocol(f[0]);
        if (!protocol) throw std::invalid_argument("unknown protocol '" + std::string(f[0]) + "'");
        r.protocol = *protocol;
        r.k = number<std::uint32_t>(f[1]);
        r.n = number<std::uint32_t>(f[2]);
        r.f = number<std::uint32_t>(f[3]);
        r.txn_count = number<std::uint64_t>(f[4]);
        r.rounds_total = number<std::uint64_t>(f[5]);
        r.messages_total = number<std::uint64_t>(f[6]);
        r.sim_time_units = number<std::uint64_t>(f[7]);
        r.decision_commit_count = number<std::uint64_t>(f[8]);
        r.decision_rollback_count = number<std::uint64_t>(f[9]);
        r.seed = number<std::uint64_t>(f[10]);
        rows.push_back(r);
    }
    if (header) throw std::invalid_argument("empty CSV");
    return rows;
}

std::uint64_t column(const CsvRow& row, std::string_view name) {
    if (name == "txn_count") return row.txn_count;
    if (name == "k") return row.k;
    if (name == "n") return row.n;
    throw std::invalid_argument("no plot axis '" + std::string(name) + "'");
}

}  // namespace xledger::cli
