#include "morphoplast/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace morphoplast {

using nlohmann::json;

std::string_view role_name(Role r) {
  switch (r) {
    case Role::input: return "input";
    case Role::hidden: return "hidden";
    case Role::output: return "output";
  }
  return "hidden";
}

Role role_from_name(std::string_view name) {
  if (name == "input") return Role::input;
  if (name == "hidden") return Role::hidden;
  if (name == "output") return Role::output;
  throw std::invalid_argument("unknown neuron role '" + std::string(name) + "'");
}

std::size_t DevelopedNetwork::count(Role r) const {
  std::size_t n = 0;
  for (const auto& nr : neurons) n += nr.role == r;
  return n;
}

bool DevelopedNetwork::functional_for(std::size_t n_obs, std::size_t n_actions) const {
  return count(Role::input) >= n_obs && count(Role::output) >= n_actions;
}

std::string DevelopedNetwork::canonical_string() const {
  std::string s = std::to_string(width) + "x" + std::to_string(height) + "|";
  for (const auto& n : neurons) {
    s += std::to_string(n.x) + "," + std::to_string(n.y) + "," + std::string(role_name(n.role)) + ";";
  }
  s += "|";
  char buf[64];
  for (const auto& c : connections) {
    const Neuron& a = neurons[static_cast<std::size_t>(c.src)];
    const Neuron& b = neurons[static_cast<std::size_t>(c.dst)];
    std::snprintf(buf, sizeof(buf), "%.12f", c.weight);
    s += std::to_string(a.x) + "," + std::to_string(a.y) + ">" + std::to_string(b.x) + "," +
         std::to_string(b.y) + ":" + buf + ";";
  }
  return s;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t DevelopedNetwork::hash() const { return fnv1a64(canonical_string()); }

std::string DevelopedNetwork::id() const { return hex64(hash()); }

void DevelopedNetwork::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("network grid must be non-empty");
  if (neurons.size() > static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("more neurons than grid cells");
  }
  for (std::size_t i = 0; i < neurons.size(); ++i) {
    const auto& n = neurons[i];
    if (n.x < 0 || n.y < 0 || n.x >= width || n.y >= height) {
      throw std::invalid_argument("neuron off grid");
    }
    if (i > 0) {
      const auto& p = neurons[i - 1];
      if (p.y * width + p.x >= n.y * width + n.x) {
        throw std::invalid_argument("neurons not in strict row-major order");
      }
    }
  }
  const int n = static_cast<int>(neurons.size());
  for (std::size_t i = 0; i < connections.size(); ++i) {
    const auto& c = connections[i];
    if (c.src < 0 || c.dst < 0 || c.src >= n || c.dst >= n) {
      throw std::invalid_argument("connection references missing neuron");
    }
    if (!std::isfinite(c.weight)) throw std::invalid_argument("non-finite connection weight");
    if (i > 0) {
      const auto& p = connections[i - 1];
      if (std::pair(p.src, p.dst) >= std::pair(c.src, c.dst)) {
        throw std::invalid_argument("connections unsorted or duplicated");
      }
    }
  }
}

std::string network_to_json_line(const DevelopedNetwork& net) {
  json j;
  j["id"] = net.id();
  j["origin"] = net.origin;
  j["width"] = net.width;
  j["height"] = net.height;
  json ns = json::array();
  for (const auto& n : net.neurons) ns.push_back({n.x, n.y, std::string(role_name(n.role))});
  j["neurons"] = std::move(ns);
  json cs = json::array();
  for (const auto& c : net.connections) cs.push_back({c.src, c.dst, c.weight});
  j["connections"] = std::move(cs);
  return j.dump();
}

DevelopedNetwork network_from_json_line(std::string_view line) {
  const json j = json::parse(line);
  DevelopedNetwork net;
  net.origin = j.value("origin", std::string("developed"));
  net.width = j.at("width").get<int>();
  net.height = j.at("height").get<int>();
  for (const auto& n : j.at("neurons")) {
    net.neurons.push_back({n.at(0).get<int>(), n.at(1).get<int>(),
                           role_from_name(n.at(2).get<std::string>())});
  }
  for (const auto& c : j.at("connections")) {
    net.connections.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<double>()});
  }
  net.validate();
  if (j.contains("id") && j["id"].get<std::string>() != net.id()) {
    throw std::invalid_argument("network id does not match its content");
  }
  return net;
}

void write_network_file(const std::string& path, const std::vector<DevelopedNetwork>& nets,
                        const std::string& provenance_json) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open network file " + path);
  if (!provenance_json.empty()) out << provenance_json << '\n';
  for (const auto& n : nets) out << network_to_json_line(n) << '\n';
}

void append_network(const std::string& path, const DevelopedNetwork& net) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open network file " + path);
  out << network_to_json_line(net) << '\n';
}

std::vector<DevelopedNetwork> read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file " + path);
  std::vector<DevelopedNetwork> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Provenance / schema header lines carry no "neurons" field.
    if (line.find("\"neurons\"") == std::string::npos) continue;
    out.push_back(network_from_json_line(line));
  }
  return out;
}

}  // namespace morphoplast
