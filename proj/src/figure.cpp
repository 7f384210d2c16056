#include "lbd/figure.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lbd/error.hpp"
#include "lbd/text_format.hpp"

namespace lbd {

namespace {

using json = nlohmann::json;

constexpr double kSize = 800.0;
constexpr double kMargin = 60.0;

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct NodeView {
  std::string id;
  std::string kind;
  double x;
  double y;
  bool outlier;
};

std::vector<NodeView> nodes_of(const json& result) {
  try {
    std::vector<NodeView> nodes;
    for (const auto& n : result.at("network").at("nodes")) {
      nodes.push_back({n.at("id").get<std::string>(), n.at("kind").get<std::string>(),
                       n.at("x").get<double>(), n.at("y").get<double>(),
                       n.at("outlier").get<bool>()});
    }
    return nodes;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedRecord, std::string("query result: ") + e.what());
  }
}

std::set<std::pair<std::string, std::string>> path_edges(const json& result) {
  std::set<std::pair<std::string, std::string>> edges;
  const auto path = result.at("active_path").get<std::vector<std::string>>();
  for (std::size_t i = 1; i < path.size(); ++i) {
    edges.insert(std::minmax(path[i - 1], path[i]));
  }
  return edges;
}

}  // namespace

std::string render_svg(const json& result) {
  const auto nodes = nodes_of(result);
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i == 0 || nodes[i].x < min_x) min_x = nodes[i].x;
    if (i == 0 || nodes[i].x > max_x) max_x = nodes[i].x;
    if (i == 0 || nodes[i].y < min_y) min_y = nodes[i].y;
    if (i == 0 || nodes[i].y > max_y) max_y = nodes[i].y;
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double scale = (kSize - 2 * kMargin) / span;
  std::map<std::string, std::pair<double, double>> screen;
  for (const auto& n : nodes) {
    // SVG y grows downwards.
    screen[n.id] = {kMargin + (n.x - min_x) * scale, kSize - kMargin - (n.y - min_y) * scale};
  }
  const auto on_path = path_edges(result);
  const auto fmt = [](double v) { return format_fixed(v, 2); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
                    "viewBox=\"0 0 800 800\">\n<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  std::string highlighted;
  for (const auto& e : result.at("network").at("edges")) {
    const auto a = e.at("source").get<std::string>();
    const auto b = e.at("target").get<std::string>();
    const auto [ax, ay] = screen.at(a);
    const auto [bx, by] = screen.at(b);
    const bool hot = on_path.contains(std::minmax(a, b));
    (hot ? highlighted : svg) += "<line x1=\"" + fmt(ax) + "\" y1=\"" + fmt(ay) + "\" x2=\"" +
                                 fmt(bx) + "\" y2=\"" + fmt(by) + "\" stroke=\"" +
                                 (hot ? "red\" stroke-width=\"3" : "#999999\" stroke-width=\"1") +
                                 "\"/>\n";
  }
  svg += highlighted;
  for (const auto& n : nodes) {
    const auto [x, y] = screen.at(n.id);
    const char* fill = n.kind == "topic" ? "#4a7ab5" : "#e08a1e";
    svg += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"" +
           (n.kind == "topic" ? "6" : "9") + "\" fill=\"" + (n.outlier ? "white" : fill) +
           "\" stroke=\"" + fill + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(x + 10) + "\" y=\"" + fmt(y - 8) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape_xml(n.id) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string coordinate_table(const json& result) {
  const auto nodes = nodes_of(result);
  std::set<std::string> path;
  for (const auto& id : result.at("active_path")) path.insert(id.get<std::string>());
  std::string out = "id\tkind\tx\ty\toutlier\ton_path\n";
  for (const auto& n : nodes) {
    out += n.id + '\t' + n.kind + '\t' + format_double(n.x) + '\t' + format_double(n.y) + '\t' +
           (n.outlier ? "1" : "0") + '\t' + (path.contains(n.id) ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace lbd
