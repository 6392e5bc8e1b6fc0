#pragma once

#include <string>
#include <vector>

#include "hypertest/circuit.hpp"

namespace hypertest {

/// A circuit cut into C pipeline stages with D-deep per-thread state memories.
/// banks[b] lists the nets latched into the CR registers between stage b and
/// b+1. memory_map gives the state-memory address of each thread.
struct ShpCircuit {
  Circuit base;
  unsigned C = 1;
  unsigned D = 1;
  std::vector<unsigned> stage;             // per gate
  std::vector<std::vector<NetId>> banks;   // C-1 entries
  std::vector<unsigned> memory_map;        // D entries

  std::size_t cr_bits() const;
};

ShpCircuit barrel_transform(const Circuit& c, unsigned D);
ShpCircuit cslow_transform(const Circuit& c, unsigned C);
ShpCircuit shp_transform(const Circuit& c, unsigned C, unsigned D);

/// Stage of each gate from balanced levelization bands.
std::vector<unsigned> balanced_stages(const Circuit& c, unsigned C);
/// Nets that must be held in each CR bank for the given stage assignment.
std::vector<std::vector<NetId>> bank_membership(const Circuit& c, const std::vector<unsigned>& stage, unsigned C);

struct PathCheck {
  bool ok = false;
  unsigned min_crossings = 0;
  unsigned max_crossings = 0;
  std::vector<std::string> problems;
};

/// Checks, from the stage map and bank contents alone, that every
/// source-to-sink combinational path crosses exactly C-1 banks.
PathCheck check_paths(const ShpCircuit& s);

std::string write_shp(const ShpCircuit& s);
ShpCircuit read_shp(std::string_view text);
ShpCircuit load_shp(const std::string& path);

}  // namespace hypertest
