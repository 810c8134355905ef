#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "nishimori/born_sampler.hpp"
#include "nishimori/geometry.hpp"

namespace nishimori {

/// Self-describing header of a binary shot record file.
///
/// Layout (all integers little-endian, doubles as IEEE-754 bit patterns):
///   char[8] "NISHSHOT", u32 version, u32 flags, u64 geometry hash,
///   u32 num_sites, u32 num_bonds, f64 t_A, f64 p_s, f64 p_sigma,
///   u64 seed, u64 shot count.
/// Each record holds four LSB-first bit-packed fields of fixed width:
///   sigma, s, s_prime (ceil(bonds/8) bytes each for the syndromes),
///   sigma_readout. A set bit encodes -1.
/// Syndromes are stored in the ferromagnetic convention (flag bit 0 set);
/// the device's auxiliary outcome is the negated value.
struct ShotFileHeader {
  std::uint32_t version = 1;
  std::uint32_t flags = 1;
  std::uint64_t geometry_hash = 0;
  std::uint32_t num_sites = 0;
  std::uint32_t num_bonds = 0;
  double t_a = 0.0;
  double p_s = 0.0;
  double p_sigma = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t shots = 0;

  std::size_t record_bytes() const;
};

class ShotWriter {
 public:
  ShotWriter(const std::string& path, const LatticeGeometry& geom, const ProtocolParams& params);
  ~ShotWriter();
  ShotWriter(const ShotWriter&) = delete;
  ShotWriter& operator=(const ShotWriter&) = delete;

  void write(const Shot& shot);
  /// Patches the shot count into the header and closes the file.
  void close();

 private:
  std::ofstream out_;
  ShotFileHeader header_;
};

class ShotReader {
 public:
  explicit ShotReader(const std::string& path);

  const ShotFileHeader& header() const { return header_; }
  /// Returns false at end of file.
  bool next(Shot& shot);

 private:
  std::ifstream in_;
  ShotFileHeader header_;
  std::uint64_t read_ = 0;
};

}  // namespace nishimori
