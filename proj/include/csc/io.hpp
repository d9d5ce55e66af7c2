#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csc/conv_dictionary.hpp"
#include "csc/denoise.hpp"
#include "csc/mlcsc.hpp"
#include "csc/sparsify.hpp"
#include "csc/tensor.hpp"

namespace csc::io {

using Bytes = std::vector<std::uint8_t>;

// CSCT: "CSCT", u8 version=1, u32le height, width, channels, then the values
// as f32le in index order. No padding, no trailing bytes.
Bytes encode_tensor(const Tensor3& t);
Tensor3 decode_tensor(const Bytes& bytes);

// CSCD: "CSCD", u8 version=1, u32le m, n, c, s, p, then m*n*n*c f32le
// values, atoms concatenated.
Bytes encode_dictionary(const ConvDictionary& d);
ConvDictionary decode_dictionary(const Bytes& bytes);

// Binary 8-bit netpbm: P5 for one channel, P6 for three. Values are clamped
// to [0, 255] and rounded half away from zero.
Bytes encode_netpbm(const Tensor3& image);
Tensor3 decode_netpbm(const Bytes& bytes);
std::uint8_t to_byte(float value);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Bytes& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

inline Tensor3 read_tensor(const std::filesystem::path& p) { return decode_tensor(read_file(p)); }
inline void write_tensor(const std::filesystem::path& p, const Tensor3& t) { write_file(p, encode_tensor(t)); }
inline ConvDictionary read_dictionary(const std::filesystem::path& p) { return decode_dictionary(read_file(p)); }
inline void write_dictionary(const std::filesystem::path& p, const ConvDictionary& d) {
  write_file(p, encode_dictionary(d));
}
inline Tensor3 read_image(const std::filesystem::path& p) { return decode_netpbm(read_file(p)); }
inline void write_image(const std::filesystem::path& p, const Tensor3& t) { write_file(p, encode_netpbm(t)); }

/// Lowercase hex SHA-256.
std::string sha256_hex(const Bytes& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Shortest round-trip decimal form with '.' separator; "inf"/"-inf"/"nan".
std::string format_double(double v);

/// `# {global stats json}` then `row,col,nnz_fraction` lines.
std::string sparsity_csv(const SparsityReport& report);
/// One pixel per needle, value round(fraction * 255).
Tensor3 sparsity_heat(const SparsityReport& report);

/// `# {header json}` then `iter,objective` lines (iteration 0 is the start).
std::string pursuit_trace_csv(const PursuitTrace& trace, const std::string& header_json);
/// `# {header json}` then `iter,psnr_single,psnr_avg` lines.
std::string denoise_trace_csv(const DenoiseRun& run, const std::string& header_json);

/// Parses "l1", "l0", "l0inf" with the matching budget.
SparsityRule make_rule(const std::string& name, double lambda, std::size_t k);
std::string rule_name(const SparsityRule& rule);

/// Model manifest:
///   {"layers": [{"dictionary": "d1.cscd", "rule": "l0inf", "k": 2},
///               {"dictionary": "d2.cscd", "rule": "l1", "lambda": 0.1}]}
/// Entry 0 is D_1 (image side). Relative paths resolve against the manifest's
/// directory. Geometry is validated on load (CascadeGeometryError names the
/// layer).
MlCscModel load_model(const std::filesystem::path& manifest);
std::vector<std::filesystem::path> model_dictionary_paths(const std::filesystem::path& manifest);

}  // namespace csc::io
