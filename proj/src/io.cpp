#include "csc/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "csc/errors.hpp"
#include "overloaded.hpp"

namespace csc::io {

namespace {

using json = nlohmann::json;

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_f32(Bytes& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t to_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ShapeError(std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

// Little-endian cursor over a byte buffer; every failure reports its offset.
class Reader {
 public:
  explicit Reader(const Bytes& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void expect_magic(const char (&magic)[5]) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (pos_ + i >= bytes_.size()) throw FormatError(pos_ + i, "truncated magic");
      if (bytes_[pos_ + i] != static_cast<std::uint8_t>(magic[i])) {
        throw FormatError(pos_ + i, std::string("bad magic, expected ") + magic);
      }
    }
    pos_ += 4;
  }

  std::uint8_t u8(const char* field) {
    need(1, field);
    return bytes_[pos_++];
  }

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint32_t positive_u32(const char* field) {
    const std::size_t at = pos_;
    const std::uint32_t v = u32(field);
    if (v == 0) throw FormatError(at, std::string(field) + " must be positive");
    return v;
  }

  void read_floats(std::vector<float>& out, std::size_t count) {
    if ((bytes_.size() - pos_) / 4 < count) {
      throw FormatError(bytes_.size(), "payload truncated: expected " + std::to_string(count) + " floats");
    }
    out.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t at = pos_;
      const float v = std::bit_cast<float>(u32("value"));
      if (!std::isfinite(v)) throw FormatError(at, "non-finite value");
      out[i] = v;
    }
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) {
      throw FormatError(pos_, std::to_string(bytes_.size() - pos_) + " trailing bytes after payload");
    }
  }

 private:
  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) throw FormatError(pos_, std::string("truncated while reading ") + field);
  }

  const Bytes& bytes_;
  std::size_t pos_ = 0;
};

std::size_t checked_product(std::initializer_list<std::size_t> dims, std::size_t at) {
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d != 0 && total > std::numeric_limits<std::size_t>::max() / 4 / d) throw FormatError(at, "size overflow");
    total *= d;
  }
  return total;
}

void expect_version(Reader& r) {
  const std::size_t at = r.offset();
  const std::uint8_t version = r.u8("version");
  if (version != 1) throw FormatError(at, "unsupported version " + std::to_string(version));
}

// netpbm header token: skips whitespace and '#' comments.
std::string pnm_token(const Bytes& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char ch = static_cast<char>(bytes[pos]);
    if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  if (token.empty()) throw FormatError(pos, "truncated netpbm header");
  return token;
}

std::size_t pnm_number(const Bytes& bytes, std::size_t& pos, const char* field) {
  const std::size_t at = pos;
  const std::string token = pnm_token(bytes, pos);
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size() || value == 0) {
    throw FormatError(at, std::string("bad netpbm ") + field + " '" + token + "'");
  }
  return value;
}

}  // namespace

Bytes encode_tensor(const Tensor3& t) {
  Bytes out = {'C', 'S', 'C', 'T', 1};
  out.reserve(17 + 4 * t.size());
  put_u32(out, to_u32(t.height(), "height"));
  put_u32(out, to_u32(t.width(), "width"));
  put_u32(out, to_u32(t.channels(), "channels"));
  for (float v : t.values()) put_f32(out, v);
  return out;
}

Tensor3 decode_tensor(const Bytes& bytes) {
  Reader r(bytes);
  r.expect_magic("CSCT");
  expect_version(r);
  const std::size_t h = r.positive_u32("height");
  const std::size_t w = r.positive_u32("width");
  const std::size_t c = r.positive_u32("channels");
  std::vector<float> data;
  r.read_floats(data, checked_product({h, w, c}, r.offset()));
  r.expect_end();
  return Tensor3(h, w, c, std::move(data));
}

Bytes encode_dictionary(const ConvDictionary& d) {
  Bytes out = {'C', 'S', 'C', 'D', 1};
  out.reserve(25 + 4 * d.data().size());
  put_u32(out, to_u32(d.atom_count(), "m"));
  put_u32(out, to_u32(d.atom_size(), "n"));
  put_u32(out, to_u32(d.channels(), "c"));
  put_u32(out, to_u32(d.stride(), "s"));
  put_u32(out, to_u32(d.padding(), "p"));
  for (float v : d.data()) put_f32(out, v);
  return out;
}

ConvDictionary decode_dictionary(const Bytes& bytes) {
  Reader r(bytes);
  r.expect_magic("CSCD");
  expect_version(r);
  const std::size_t m = r.positive_u32("m");
  const std::size_t n = r.positive_u32("n");
  const std::size_t c = r.positive_u32("c");
  const std::size_t s = r.positive_u32("s");
  const std::size_t p_at = r.offset();
  const std::size_t p = r.u32("p");
  if (2 * p >= n) throw FormatError(p_at, "padding too large for atom size");
  std::vector<float> data;
  r.read_floats(data, checked_product({m, n, n, c}, r.offset()));
  r.expect_end();
  return ConvDictionary(m, n, c, s, p, std::move(data));
}

std::uint8_t to_byte(float value) {
  const double clamped = std::clamp(static_cast<double>(value), 0.0, 255.0);
  return static_cast<std::uint8_t>(std::round(clamped));
}

Bytes encode_netpbm(const Tensor3& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DomainError("netpbm output needs 1 or 3 channels, got " + std::to_string(image.channels()));
  }
  const std::string header = std::string(image.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + image.size());
  for (float v : image.values()) out.push_back(to_byte(v));
  return out;
}

Tensor3 decode_netpbm(const Bytes& bytes) {
  std::size_t pos = 0;
  const std::string magic = pnm_token(bytes, pos);
  std::size_t channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError(0, "not a binary PGM/PPM (magic '" + magic + "')");
  }
  const std::size_t width = pnm_number(bytes, pos, "width");
  const std::size_t height = pnm_number(bytes, pos, "height");
  const std::size_t maxval_at = pos;
  const std::size_t maxval = pnm_number(bytes, pos, "maxval");
  if (maxval > 255) throw FormatError(maxval_at, "only 8-bit netpbm is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError(pos, "missing raster separator");
  ++pos;
  const std::size_t count = checked_product({height, width, channels}, pos);
  if (bytes.size() - pos < count) throw FormatError(bytes.size(), "raster truncated");
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = static_cast<float>(bytes[pos + i]);
  return Tensor3(height, width, channels, std::move(data));
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

std::string sha256_hex(const Bytes& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string sparsity_csv(const SparsityReport& report) {
  const json stats = {{"height", report.height},
                      {"width", report.width},
                      {"channels", report.channels},
                      {"total_nnz", report.total_nnz},
                      {"global_nnz_fraction", report.global_nnz_fraction},
                      {"max_needle_nnz", report.max_needle_nnz}};
  std::string out = "# " + stats.dump() + "\nrow,col,nnz_fraction\n";
  for (std::size_t h = 0; h < report.height; ++h) {
    for (std::size_t w = 0; w < report.width; ++w) {
      out += std::to_string(h) + "," + std::to_string(w) + "," + format_double(report.needle_fraction(h, w)) + "\n";
    }
  }
  return out;
}

Tensor3 sparsity_heat(const SparsityReport& report) {
  Tensor3 heat(report.height, report.width, 1);
  for (std::size_t i = 0; i < report.needle_nnz_map.size(); ++i) {
    heat[i] = static_cast<float>(std::round(report.needle_nnz_map[i] * 255.0));
  }
  return heat;
}

std::string pursuit_trace_csv(const PursuitTrace& trace, const std::string& header_json) {
  std::string out = "# " + header_json + "\niter,objective\n0," + format_double(trace.initial_objective) + "\n";
  for (std::size_t i = 0; i < trace.objective.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(trace.objective[i]) + "\n";
  }
  return out;
}

std::string denoise_trace_csv(const DenoiseRun& run, const std::string& header_json) {
  std::string out = "# " + header_json + "\niter,psnr_single,psnr_avg\n";
  for (std::size_t i = 0; i < run.psnr_single.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(run.psnr_single[i]) + "," +
           format_double(run.psnr_average[i]) + "\n";
  }
  return out;
}

SparsityRule make_rule(const std::string& name, double lambda, std::size_t k) {
  SparsityRule rule;
  if (name == "l1") {
    rule = L1Penalty{lambda};
  } else if (name == "l0") {
    rule = L0Global{k};
  } else if (name == "l0inf") {
    rule = L0InfNeedle{k};
  } else {
    throw DomainError("unknown sparsity rule '" + name + "' (expected l1, l0 or l0inf)");
  }
  validate_rule(rule);
  return rule;
}

std::string rule_name(const SparsityRule& rule) {
  return std::visit(overloaded{[](const L1Penalty&) { return std::string("l1"); },
                               [](const L0Global&) { return std::string("l0"); },
                               [](const L0InfNeedle&) { return std::string("l0inf"); }},
                    rule);
}

namespace {

json parse_manifest(const std::filesystem::path& manifest) {
  const Bytes bytes = read_file(manifest);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw FormatError(e.byte, std::string("model manifest is not valid JSON: ") + e.what());
  }
}

const json& manifest_layers(const json& doc) {
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array() || doc["layers"].empty()) {
    throw DomainError("model manifest needs a non-empty \"layers\" array");
  }
  return doc["layers"];
}

}  // namespace

std::vector<std::filesystem::path> model_dictionary_paths(const std::filesystem::path& manifest) {
  const json doc = parse_manifest(manifest);
  std::vector<std::filesystem::path> paths;
  std::size_t index = 0;
  for (const json& entry : manifest_layers(doc)) {
    ++index;
    if (!entry.is_object() || !entry.contains("dictionary") || !entry["dictionary"].is_string()) {
      throw CascadeGeometryError(index, "missing \"dictionary\" path");
    }
    std::filesystem::path p = entry["dictionary"].get<std::string>();
    if (p.is_relative()) p = manifest.parent_path() / p;
    paths.push_back(p);
  }
  return paths;
}

MlCscModel load_model(const std::filesystem::path& manifest) {
  const json doc = parse_manifest(manifest);
  const auto paths = model_dictionary_paths(manifest);
  std::vector<MlCscLayer> layers;
  std::size_t index = 0;
  for (const json& entry : manifest_layers(doc)) {
    ++index;
    const std::string rule = entry.value("rule", std::string("l0inf"));
    double lambda = 0.0;
    std::size_t k = 0;
    try {
      lambda = entry.value("lambda", 0.0);
      k = entry.value("k", std::size_t{0});
    } catch (const json::exception& e) {
      throw CascadeGeometryError(index, std::string("bad budget: ") + e.what());
    }
    SparsityRule parsed;
    try {
      parsed = make_rule(rule, lambda, k);
    } catch (const DomainError& e) {
      throw CascadeGeometryError(index, e.what());
    }
    ConvDictionary dict;
    try {
      dict = read_dictionary(paths[index - 1]);
    } catch (const FormatError& e) {
      throw CascadeGeometryError(index, std::string("dictionary file: ") + e.what());
    }
    layers.push_back({std::move(dict), parsed});
  }
  return MlCscModel(std::move(layers));
}

}  // namespace csc::io
