#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "nishimori/shot_file.hpp"

using namespace nishimori;

TEST_CASE("shot files round-trip") {
  const auto g = build_brickwall(3);
  const auto params = ProtocolParams::make(0.17 * kPi, 0.05, 0.02, 10, 42);
  const auto path = (std::filesystem::temp_directory_path() / "nishimori_roundtrip.nshot").string();
  std::vector<Shot> shots;
  Rng rng(42);
  {
    ShotWriter w(path, g, params);
    for (int i = 0; i < 37; ++i) {
      Shot s = sample_shot(g, params.t_a, rng);
      apply_noise(s, params.p_s, params.p_sigma, rng);
      w.write(s);
      shots.push_back(s);
    }
  }
  ShotReader r(path);
  CHECK(r.header().shots == 37);
  CHECK(r.header().geometry_hash == g.hash());
  CHECK(r.header().num_sites == 28);
  CHECK(r.header().num_bonds == 35);
  CHECK(r.header().t_a == params.t_a);
  CHECK(r.header().p_s == 0.05);
  CHECK(r.header().p_sigma == 0.02);
  CHECK(r.header().seed == 42);
  CHECK(r.header().flags == 1);
  Shot s;
  int i = 0;
  while (r.next(s)) {
    CHECK(s.sigma == shots[i].sigma);
    CHECK(s.s == shots[i].s);
    CHECK(s.s_prime == shots[i].s_prime);
    CHECK(s.sigma_readout == shots[i].sigma_readout);
    ++i;
  }
  CHECK(i == 37);
  // header + 37 records of 2*ceil(28/8) + 2*ceil(35/8) bytes
  CHECK(std::filesystem::file_size(path) == 72 + 37 * (2 * 4 + 2 * 5));
  std::filesystem::remove(path);
}

TEST_CASE("bit layout is LSB first with set bits meaning -1") {
  const auto g = build_chain(3);
  const auto path = (std::filesystem::temp_directory_path() / "nishimori_layout.nshot").string();
  Shot s;
  s.sigma = Spins::Ones(3);
  s.sigma[1] = -1;
  s.s = Spins::Ones(2);
  s.s_prime = Spins::Ones(2);
  s.s_prime[0] = -1;
  s.sigma_readout = -Spins::Ones(3);
  {
    ShotWriter w(path, g, ProtocolParams::make(kQuarterPi));
    w.write(s);
  }
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  REQUIRE(bytes.size() == 72 + 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "NISHSHOT");
  CHECK(bytes[72] == 0x02);
  CHECK(bytes[73] == 0x00);
  CHECK(bytes[74] == 0x01);
  CHECK(bytes[75] == 0x07);
  std::filesystem::remove(path);
}

TEST_CASE("bad files are rejected") {
  const auto path = (std::filesystem::temp_directory_path() / "nishimori_bad.nshot").string();
  {
    std::ofstream out(path);
    out << "not a shot file";
  }
  CHECK_THROWS_AS(ShotReader{path}, std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(ShotReader{"/nonexistent/dir/x.nshot"}, std::runtime_error);
}
