#pragma once

#include <string>
#include <string_view>

namespace xledger::cli {

/// Static line plot of sim_time_units against `x_column`, one series per
/// protocol. Reads only the CSV text, so plot and table always agree.
std::string render_svg(std::string_view csv_text, std::string_view x_column, std::string_view title);

}  // namespace xledger::cli
