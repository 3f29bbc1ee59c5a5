#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "monotx/numerics.hpp"
#include "monotx/topology.hpp"
#include "monotx/toymodel.hpp"

namespace monotx {

enum class LatticeDtype : std::uint8_t { kF32 = 1, kF64 = 2 };

// Binary joiner-logit container:
//   "JLAT" | version u8 = 1 | dtype u8 | 2 reserved bytes |
//   T, U+1, K as little-endian u32 | row-major logits (t slowest, k fastest)
// f32 payloads are held as doubles; the upcast is exact, so writing back with
// the same dtype reproduces the input bytes.
struct LatticeFile {
  LatticeDtype dtype = LatticeDtype::kF64;
  std::uint32_t frames = 0;
  std::uint32_t rows = 0;  // U + 1
  std::uint32_t vocab_size = 0;
  std::vector<double> logits;

  static LatticeFile from_lattice(const JoinerLattice &lattice,
                                  LatticeDtype dtype = LatticeDtype::kF64);
  JoinerLattice to_lattice(int blank_id) const;
};

std::string encode_lattice(const LatticeFile &file);
LatticeFile decode_lattice(const std::string &bytes);
LatticeFile read_lattice_file(const std::filesystem::path &path);
void write_lattice_file(const std::filesystem::path &path, const LatticeFile &file);

// GraphFile JSON: {nodes:[{id,label}], edges:[{from,to,u}], start, end,
// blank_id, K}. Non-emitting nodes carry label null. The loader requires
// start = 0 and end = last node, takes U as the largest decoder state, and
// rejects graphs that fail validate_graph.
nlohmann::json graph_to_json(const AlignmentGraph &graph);
AlignmentGraph graph_from_json(const nlohmann::json &doc);
AlignmentGraph read_graph_file(const std::filesystem::path &path);

// Checkpoints are `<prefix>.json` (dims, seed, lineage, and per-layer name,
// shape and offset) plus `<prefix>.bin` holding every layer's values as
// little-endian f64, row-major, in manifest order.
void save_checkpoint(const ToyModel &model, const std::filesystem::path &prefix);
ToyModel load_checkpoint(const std::filesystem::path &prefix);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &bytes);

}  // namespace monotx
