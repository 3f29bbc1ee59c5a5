#include "monotx/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "monotx/error.hpp"

namespace monotx {

namespace {

constexpr char kMagic[4] = {'J', 'L', 'A', 'T'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 1 + 1 + 2 + 3 * 4;

template <typename U>
void put_le(std::string &out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename U>
U get_le(const std::string &in, std::size_t offset) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return value;
}

[[noreturn]] void malformed(const std::string &what) {
  throw ValidationError("malformed-file", what);
}

}  // namespace

LatticeFile LatticeFile::from_lattice(const JoinerLattice &lattice,
                                      LatticeDtype dtype) {
  LatticeFile f;
  f.dtype = dtype;
  f.frames = static_cast<std::uint32_t>(lattice.frames());
  f.rows = static_cast<std::uint32_t>(lattice.rows());
  f.vocab_size = static_cast<std::uint32_t>(lattice.vocab_size());
  f.logits = lattice.logits();
  if (dtype == LatticeDtype::kF32) {
    for (double &v : f.logits) v = static_cast<float>(v);
  }
  return f;
}

JoinerLattice LatticeFile::to_lattice(int blank_id) const {
  if (rows < 1) malformed("lattice has no decoder rows");
  return JoinerLattice(static_cast<int>(frames), static_cast<int>(rows) - 1,
                       static_cast<int>(vocab_size), blank_id, logits);
}

std::string encode_lattice(const LatticeFile &file) {
  const std::size_t n = static_cast<std::size_t>(file.frames) * file.rows *
                        file.vocab_size;
  if (file.logits.size() != n) {
    throw ValidationError("shape-mismatch", "logit count does not match T*(U+1)*K");
  }
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(file.dtype));
  out.append(2, '\0');
  put_le(out, file.frames);
  put_le(out, file.rows);
  put_le(out, file.vocab_size);
  for (double v : file.logits) {
    if (file.dtype == LatticeDtype::kF32) {
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_le(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

LatticeFile decode_lattice(const std::string &bytes) {
  if (bytes.size() < kHeaderSize) malformed("lattice file shorter than header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) malformed("bad lattice magic");
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion) {
    malformed("unsupported lattice version");
  }
  LatticeFile f;
  const auto dtype = static_cast<std::uint8_t>(bytes[5]);
  if (dtype != 1 && dtype != 2) malformed("unknown lattice dtype");
  f.dtype = static_cast<LatticeDtype>(dtype);
  f.frames = get_le<std::uint32_t>(bytes, 8);
  f.rows = get_le<std::uint32_t>(bytes, 12);
  f.vocab_size = get_le<std::uint32_t>(bytes, 16);
  const std::size_t width = dtype == 1 ? 4 : 8;
  const std::size_t n = static_cast<std::size_t>(f.frames) * f.rows * f.vocab_size;
  if ((bytes.size() - kHeaderSize) / width != n ||
      (bytes.size() - kHeaderSize) % width != 0) {
    malformed("lattice payload length does not match header");
  }
  f.logits.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = kHeaderSize + i * width;
    f.logits[i] = dtype == 1
                      ? static_cast<double>(
                            std::bit_cast<float>(get_le<std::uint32_t>(bytes, at)))
                      : std::bit_cast<double>(get_le<std::uint64_t>(bytes, at));
  }
  return f;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("unreadable-file", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("unwritable-file", "cannot open " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("unwritable-file", "short write to " + path.string());
}

LatticeFile read_lattice_file(const std::filesystem::path &path) {
  return decode_lattice(read_file(path));
}

void write_lattice_file(const std::filesystem::path &path, const LatticeFile &file) {
  write_file(path, encode_lattice(file));
}

nlohmann::json graph_to_json(const AlignmentGraph &graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto &n : graph.nodes) {
    nodes.push_back({{"id", n.id},
                     {"label", n.emit_label == kNonEmitting
                                   ? nlohmann::json(nullptr)
                                   : nlohmann::json(n.emit_label)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto &e : graph.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"u", e.decoder_state}});
  }
  return {{"nodes", nodes},
          {"edges", edges},
          {"start", graph.start_id()},
          {"end", graph.end_id()},
          {"blank_id", graph.blank_id},
          {"K", graph.vocab_size}};
}

AlignmentGraph graph_from_json(const nlohmann::json &doc) {
  AlignmentGraph g;
  try {
    for (const auto &n : doc.at("nodes")) {
      const auto &label = n.at("label");
      g.nodes.push_back({n.at("id").get<int>(),
                         label.is_null() ? kNonEmitting : label.get<int>()});
    }
    for (const auto &e : doc.at("edges")) {
      g.edges.push_back(
          {e.at("from").get<int>(), e.at("to").get<int>(), e.at("u").get<int>()});
    }
    g.blank_id = doc.at("blank_id").get<int>();
    g.vocab_size = doc.at("K").get<int>();
    if (doc.at("start").get<int>() != 0 ||
        doc.at("end").get<int>() != static_cast<int>(g.nodes.size()) - 1) {
      throw ValidationError("bad-graph",
                            "start must be node 0 and end the last node");
    }
  } catch (const nlohmann::json::exception &e) {
    malformed(std::string("graph file: ") + e.what());
  }
  for (const auto &e : g.edges) g.labels = std::max(g.labels, e.decoder_state);
  g.min_path_len = shortest_emitting_path(g);
  const GraphReport report = validate_graph(g);
  if (!report.ok()) {
    throw ValidationError(std::string(to_string(report.error)), report.message);
  }
  return g;
}

AlignmentGraph read_graph_file(const std::filesystem::path &path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error &e) {
    malformed(std::string("graph file: ") + e.what());
  }
  return graph_from_json(doc);
}

namespace {

nlohmann::json dims_to_json(const ModelDims &d) {
  return {{"input_dim", d.input_dim},
          {"vocab_size", d.vocab_size},
          {"blank_id", d.blank_id},
          {"enc_hidden", d.enc_hidden},
          {"pred_hidden", d.pred_hidden},
          {"joint_hidden", d.joint_hidden},
          {"encoder", d.encoder == EncoderKind::kRecurrent ? "recurrent"
                                                           : "context-window"},
          {"context", d.context}};
}

ModelDims dims_from_json(const nlohmann::json &j) {
  ModelDims d;
  d.input_dim = j.at("input_dim").get<int>();
  d.vocab_size = j.at("vocab_size").get<int>();
  d.blank_id = j.at("blank_id").get<int>();
  d.enc_hidden = j.at("enc_hidden").get<int>();
  d.pred_hidden = j.at("pred_hidden").get<int>();
  d.joint_hidden = j.at("joint_hidden").get<int>();
  d.encoder = j.at("encoder").get<std::string>() == "recurrent"
                  ? EncoderKind::kRecurrent
                  : EncoderKind::kContextWindow;
  d.context = j.at("context").get<int>();
  return d;
}

std::filesystem::path with_suffix(const std::filesystem::path &prefix,
                                  const char *suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

}  // namespace

void save_checkpoint(const ToyModel &model, const std::filesystem::path &prefix) {
  nlohmann::json layers = nlohmann::json::array();
  std::string payload;
  std::size_t offset = 0;
  for (const auto &l : model.layers()) {
    layers.push_back({{"name", l.name},
                      {"shape", {l.value.rows(), l.value.cols()}},
                      {"offset", offset}});
    for (Eigen::Index i = 0; i < l.value.size(); ++i) {
      put_le(payload, std::bit_cast<std::uint64_t>(l.value.data()[i]));
    }
    offset += static_cast<std::size_t>(l.value.size());
  }
  const nlohmann::json manifest = {{"format", "monotx-checkpoint"},
                                   {"version", 1},
                                   {"dims", dims_to_json(model.dims())},
                                   {"seed", model.seed()},
                                   {"lineage", model.lineage()},
                                   {"parameters", offset},
                                   {"layers", layers}};
  write_file(with_suffix(prefix, ".json"), manifest.dump(2) + "\n");
  write_file(with_suffix(prefix, ".bin"), payload);
}

ToyModel load_checkpoint(const std::filesystem::path &prefix) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(with_suffix(prefix, ".json")));
  } catch (const nlohmann::json::parse_error &e) {
    malformed(std::string("checkpoint manifest: ") + e.what());
  }
  const std::string payload = read_file(with_suffix(prefix, ".bin"));
  try {
    ToyModel m = ToyModel::zeros(dims_from_json(manifest.at("dims")));
    m.set_seed(manifest.at("seed").get<std::uint64_t>());
    m.lineage() = manifest.at("lineage").get<std::vector<std::string>>();
    const auto &layers = manifest.at("layers");
    if (layers.size() != m.layers().size()) {
      throw ValidationError("shape-mismatch", "checkpoint layer count differs");
    }
    for (const auto &entry : layers) {
      Layer &l = m.layer(entry.at("name").get<std::string>());
      const auto shape = entry.at("shape").get<std::vector<long>>();
      if (shape.size() != 2 || shape[0] != l.value.rows() ||
          shape[1] != l.value.cols()) {
        throw ValidationError("shape-mismatch", "layer " + l.name + " shape differs");
      }
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto count = static_cast<std::size_t>(l.value.size());
      if ((offset + count) * 8 > payload.size()) {
        malformed("checkpoint payload too short for layer " + l.name);
      }
      for (std::size_t i = 0; i < count; ++i) {
        l.value.data()[i] =
            std::bit_cast<double>(get_le<std::uint64_t>(payload, (offset + i) * 8));
      }
    }
    return m;
  } catch (const nlohmann::json::exception &e) {
    malformed(std::string("checkpoint manifest: ") + e.what());
  }
}

}  // namespace monotx
