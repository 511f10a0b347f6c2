#include "asnl/network_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace asnl {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw NetworkFormatError(where + ": " + what);
}

double number_at(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "non-finite number");
  return d;
}

int id_at(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer id");
  return v.get<int>();
}

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where + "/" + key, "missing field");
  return *it;
}

Point2 point_at(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) fail(where, "expected [x, y]");
  return {number_at(v[0], where + "/0"), number_at(v[1], where + "/1")};
}

}  // namespace

SensorNetwork network_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) fail("", "document must be an object");
  const auto& dim = field(doc, "dim", "");
  if (!dim.is_number_integer() || dim.get<int>() != 2) fail("/dim", "must be 2");

  const auto& anchors = field(doc, "anchors", "");
  const auto& unknowns = field(doc, "unknowns", "");
  if (!anchors.is_array()) fail("/anchors", "expected a list");
  if (!unknowns.is_array()) fail("/unknowns", "expected a list");
  const int na = static_cast<int>(anchors.size());
  const int n = na + static_cast<int>(unknowns.size());
  std::vector<Point2> pos(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);

  auto read_nodes = [&](const nlohmann::json& list, const std::string& name, int lo, int hi) {
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string where = "/" + name + "/" + std::to_string(k);
      const int id = id_at(field(list[k], "id", where), where + "/id");
      if (id < lo || id > hi)
        fail(where + "/id", "id " + std::to_string(id) + " outside " + std::to_string(lo) + ".." +
                                std::to_string(hi) + " (anchors must come first)");
      if (seen[static_cast<std::size_t>(id - 1)]) fail(where + "/id", "duplicate id " + std::to_string(id));
      seen[static_cast<std::size_t>(id - 1)] = 1;
      pos[static_cast<std::size_t>(id - 1)] = point_at(field(list[k], "pos", where), where + "/pos");
    }
  };
  read_nodes(anchors, "anchors", 1, na);
  read_nodes(unknowns, "unknowns", na + 1, n);

  const auto& edges = field(doc, "edges", "");
  if (!edges.is_array()) fail("/edges", "expected a list");
  Graph g(n);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "/edges/" + std::to_string(k);
    const auto& e = edges[k];
    if (!e.is_array() || e.size() != 2) fail(where, "expected [i, j]");
    const int i = id_at(e[0], where + "/0");
    const int j = id_at(e[1], where + "/1");
    if (i < 1 || i > n || j < 1 || j > n) fail(where, "id out of range 1.." + std::to_string(n));
    if (i == j) fail(where, "self loop");
    if (!g.add_edge(i - 1, j - 1)) fail(where, "duplicate edge");
  }

  std::vector<LocalFrame> frames;
  if (auto it = doc.find("frames"); it != doc.end()) {
    if (!it->is_array()) fail("/frames", "expected a list");
    frames.resize(static_cast<std::size_t>(n));
    std::vector<char> has(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string where = "/frames/" + std::to_string(k);
      const auto& f = (*it)[k];
      const int id = id_at(field(f, "id", where), where + "/id");
      if (id < 1 || id > n) fail(where + "/id", "id out of range");
      if (has[static_cast<std::size_t>(id - 1)]) fail(where + "/id", "duplicate frame");
      has[static_cast<std::size_t>(id - 1)] = 1;
      const auto& r = field(f, "rotation", where);
      if (!r.is_array() || r.size() != 4) fail(where + "/rotation", "expected 4 numbers, row-major");
      Mat2 rot;
      for (int q = 0; q < 4; ++q)
        rot(q / 2, q % 2) = number_at(r[static_cast<std::size_t>(q)], where + "/rotation/" + std::to_string(q));
      if ((rot.transpose() * rot - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-12)
        fail(where + "/rotation", "not orthogonal within 1e-12");
      LocalFrame& lf = frames[static_cast<std::size_t>(id - 1)];
      lf.rotation = rot;
      if (auto off = f.find("offset"); off != f.end()) lf.offset = point_at(*off, where + "/offset");
    }
  }

  try {
    return SensorNetwork(Framework(std::move(g), std::move(pos)), na, std::move(frames));
  } catch (const Error& e) {
    fail("", e.what());
  }
}

nlohmann::json network_to_json(const SensorNetwork& net) {
  nlohmann::json doc;
  doc["dim"] = 2;
  doc["anchors"] = nlohmann::json::array();
  doc["unknowns"] = nlohmann::json::array();
  for (int i = 0; i < net.size(); ++i) {
    nlohmann::json node{{"id", i + 1}, {"pos", {net.position(i).x(), net.position(i).y()}}};
    (net.is_anchor(i) ? doc["anchors"] : doc["unknowns"]).push_back(std::move(node));
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& [i, j] : net.sensing_graph().edges()) doc["edges"].push_back({i + 1, j + 1});
  doc["frames"] = nlohmann::json::array();
  for (int i = 0; i < net.size(); ++i) {
    const LocalFrame& f = net.frame(i);
    doc["frames"].push_back({{"id", i + 1},
                             {"rotation", {f.rotation(0, 0), f.rotation(0, 1), f.rotation(1, 0), f.rotation(1, 1)}},
                             {"offset", {f.offset.x(), f.offset.y()}}});
  }
  return doc;
}

SensorNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkFormatError(path + ": cannot open");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkFormatError(path + ": " + e.what());
  }
  try {
    return network_from_json(doc);
  } catch (const NetworkFormatError& e) {
    throw NetworkFormatError(path + ": " + e.what());
  }
}

void save_network(const SensorNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NetworkFormatError(path + ": cannot write");
  out << network_to_json(net).dump(2) << '\n';
}

}  // namespace asnl
