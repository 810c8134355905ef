#include "nishimori/shot_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace nishimori {

namespace {

constexpr std::array<char, 8> kMagic = {'N', 'I', 'S', 'H', 'S', 'H', 'O', 'T'};

template <typename T>
void put_le(std::ostream& os, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) os.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& is) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int ch = is.get();
    if (ch == EOF) throw std::runtime_error("shot file: truncated header");
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * i);
  }
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

std::size_t packed_bytes(std::size_t n) { return (n + 7) / 8; }

void pack(const Spins& v, std::vector<char>& out) {
  const std::size_t start = out.size();
  out.resize(start + packed_bytes(static_cast<std::size_t>(v.size())), 0);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] < 0) out[start + i / 8] = static_cast<char>(out[start + i / 8] | (1 << (i % 8)));
}

void unpack(const char* data, Eigen::Index n, Spins& v) {
  v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = (static_cast<unsigned char>(data[i / 8]) >> (i % 8)) & 1 ? std::int8_t{-1}
                                                                    : std::int8_t{1};
}

void write_header(std::ostream& os, const ShotFileHeader& h) {
  os.write(kMagic.data(), kMagic.size());
  put_le(os, h.version);
  put_le(os, h.flags);
  put_le(os, h.geometry_hash);
  put_le(os, h.num_sites);
  put_le(os, h.num_bonds);
  put_le(os, h.t_a);
  put_le(os, h.p_s);
  put_le(os, h.p_sigma);
  put_le(os, h.seed);
  put_le(os, h.shots);
}

constexpr std::streamoff kShotCountOffset = 8 + 4 + 4 + 8 + 4 + 4 + 8 + 8 + 8 + 8;

}  // namespace

std::size_t ShotFileHeader::record_bytes() const {
  return 2 * packed_bytes(num_sites) + 2 * packed_bytes(num_bonds);
}

ShotWriter::ShotWriter(const std::string& path, const LatticeGeometry& geom,
                       const ProtocolParams& params)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open shot file for writing: " + path);
  header_.geometry_hash = geom.hash();
  header_.num_sites = static_cast<std::uint32_t>(geom.num_sites());
  header_.num_bonds = static_cast<std::uint32_t>(geom.num_bonds());
  header_.t_a = params.t_a;
  header_.p_s = params.p_s;
  header_.p_sigma = params.p_sigma;
  header_.seed = params.seed;
  header_.shots = 0;
  write_header(out_, header_);
}

ShotWriter::~ShotWriter() {
  try {
    close();
  } catch (...) {
  }
}

void ShotWriter::write(const Shot& shot) {
  std::vector<char> buf;
  buf.reserve(header_.record_bytes());
  pack(shot.sigma, buf);
  pack(shot.s, buf);
  pack(shot.s_prime, buf);
  pack(shot.sigma_readout, buf);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw std::runtime_error("shot file: write failed");
  ++header_.shots;
}

void ShotWriter::close() {
  if (!out_.is_open()) return;
  out_.seekp(kShotCountOffset);
  put_le(out_, header_.shots);
  out_.close();
}

ShotReader::ShotReader(const std::string& path) : in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open shot file: " + path);
  std::array<char, 8> magic{};
  in_.read(magic.data(), magic.size());
  if (!in_ || magic != kMagic) throw std::runtime_error("not a shot file: " + path);
  header_.version = get_le<std::uint32_t>(in_);
  if (header_.version != 1) throw std::runtime_error("unsupported shot file version");
  header_.flags = get_le<std::uint32_t>(in_);
  header_.geometry_hash = get_le<std::uint64_t>(in_);
  header_.num_sites = get_le<std::uint32_t>(in_);
  header_.num_bonds = get_le<std::uint32_t>(in_);
  header_.t_a = get_le<double>(in_);
  header_.p_s = get_le<double>(in_);
  header_.p_sigma = get_le<double>(in_);
  header_.seed = get_le<std::uint64_t>(in_);
  header_.shots = get_le<std::uint64_t>(in_);
}

bool ShotReader::next(Shot& shot) {
  if (read_ >= header_.shots) return false;
  std::vector<char> buf(header_.record_bytes());
  in_.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!in_) throw std::runtime_error("shot file: truncated record");
  const auto ns = static_cast<Eigen::Index>(header_.num_sites);
  const auto nb = static_cast<Eigen::Index>(header_.num_bonds);
  const char* p = buf.data();
  unpack(p, ns, shot.sigma);
  p += packed_bytes(ns);
  unpack(p, nb, shot.s);
  p += packed_bytes(nb);
  unpack(p, nb, shot.s_prime);
  p += packed_bytes(nb);
  unpack(p, ns, shot.sigma_readout);
  ++read_;
  return true;
}

}  // namespace nishimori
