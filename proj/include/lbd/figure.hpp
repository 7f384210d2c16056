#ifndef LBD_FIGURE_HPP_
#define LBD_FIGURE_HPP_

#include <string>

#include "json.hpp"

namespace lbd {

// Topic network drawing from a serialized query result: edges in grey, the
// active path in red, outliers hollow.
std::string render_svg(const nlohmann::json& query_result);

// TSV rows `id kind x y outlier on_path` in node order.
std::string coordinate_table(const nlohmann::json& query_result);

}  // namespace lbd

#endif  // LBD_FIGURE_HPP_
