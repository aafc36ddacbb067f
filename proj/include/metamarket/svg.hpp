#pragma once

#include <string>
#include <vector>

#include "metamarket/io.hpp"

namespace metamarket {

/// Two stacked panels over the grid: eta_plus / N and S(t). Each maximal
/// run of one well label gets a shaded band and its own line segment
/// (green WellPlus, red WellMinus, gray Delta).
std::string render_market_figure(const std::vector<GridRow>& rows);

/// S_n against n with the background shaded by hidden state. `hidden`
/// holds state indices, `labels` their values (-1 red, 0 gray, +1 green,
/// anything else blue).
std::string render_hmm_figure(const std::vector<long long>& prices, const std::vector<int>& hidden,
                              const std::vector<int>& labels);

}  // namespace metamarket
