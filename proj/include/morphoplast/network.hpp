#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace morphoplast {

enum class Role : std::uint8_t { input = 0, hidden = 1, output = 2 };

std::string_view role_name(Role r);
Role role_from_name(std::string_view name);

struct Neuron {
  int x = 0;
  int y = 0;
  Role role = Role::hidden;
  bool operator==(const Neuron&) const = default;
};

struct Connection {
  int src = 0;  // neuron index
  int dst = 0;
  double weight = 0.0;
  bool operator==(const Connection&) const = default;
};

// A grown (or generated) recurrent network. Neurons are kept in row-major
// order of their grid position; connections are sorted by (src, dst) and
// unique. Self-loops are allowed.
struct DevelopedNetwork {
  int width = 0;
  int height = 0;
  std::vector<Neuron> neurons;
  std::vector<Connection> connections;
  std::string origin = "developed";

  std::size_t count(Role r) const;
  // At least n_obs input-role and n_actions output-role neurons.
  bool functional_for(std::size_t n_obs, std::size_t n_actions) const;

  // Sorted neuron positions and connection triples, weights printed with 12
  // decimals. Independent of origin.
  std::string canonical_string() const;
  std::uint64_t hash() const;
  // 16 hex digits of hash(); used as the network id everywhere.
  std::string id() const;

  // Throws std::invalid_argument if neurons are out of order or off-grid,
  // connections are unsorted, duplicated, dangling, or non-finite.
  void validate() const;

  bool operator==(const DevelopedNetwork& o) const {
    return width == o.width && height == o.height && neurons == o.neurons &&
           connections == o.connections;
  }
};

std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

// Network file: JSONL, one network per line.
std::string network_to_json_line(const DevelopedNetwork& net);
DevelopedNetwork network_from_json_line(std::string_view line);
void write_network_file(const std::string& path, const std::vector<DevelopedNetwork>& nets,
                        const std::string& provenance_json = "");
void append_network(const std::string& path, const DevelopedNetwork& net);
std::vector<DevelopedNetwork> read_network_file(const std::string& path);

}  // namespace morphoplast
