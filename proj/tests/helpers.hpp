#pragma once

#include <string>
#include <vector>

#include "rfd/graph.hpp"

namespace rfd::test {

// S->M:1, M->D:1, S->D:3
inline RoadGraph g1() {
  return RoadGraph::build({"S", "M", "D"}, {{"S", "M", 1}, {"M", "D", 1}, {"S", "D", 3}});
}

// Trap: T is a dead end except for the edge back to S.
inline RoadGraph g2_trap() {
  return RoadGraph::build({"S", "T", "M", "D"}, {{"S", "T", 1}, {"S", "M", 1}, {"M", "D", 1}, {"T", "S", 1}});
}

inline RoadGraph two_node() { return RoadGraph::build({"o", "d"}, {{"o", "d", 1}}); }

inline std::vector<std::string> ids(const RoadGraph& g, const std::vector<NodeIndex>& nodes) {
  std::vector<std::string> out;
  for (auto v : nodes) out.push_back(g.id(v));
  return out;
}

inline std::string data_file(const std::string& name) { return std::string(RFD_DATA_DIR) + "/" + name; }

}  // namespace rfd::test
