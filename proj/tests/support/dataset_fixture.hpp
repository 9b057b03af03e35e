#pragma once

// Writes a synthetic six-image subset to disk for harness tests.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "regkit/geometry.hpp"
#include "regkit/imaging.hpp"
#include "support/fixtures.hpp"

namespace regkit::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("regkit_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

inline void write_text(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary);
  out << s;
}

// Image 1 is a texture; image k is image 1 warped by homographies[k - 2].
inline void write_subset(const std::filesystem::path& dir, const Image& base,
                         const std::array<Homography, 5>& homographies) {
  std::filesystem::create_directories(dir);
  write_bytes(dir / "img1.pgm", write_pgm(base));
  for (int k = 2; k <= 6; ++k) {
    const Homography& h = homographies[k - 2];
    const Image view = warp_perspective(base, h, base.width, base.height, 0.5);
    write_bytes(dir / ("img" + std::to_string(k) + ".pgm"), write_pgm(view));
    write_text(dir / ("H1to" + std::to_string(k) + "p"), format_homography(h));
  }
}

inline void write_identity_subset(const std::filesystem::path& dir, int side,
                                  std::uint64_t seed) {
  write_subset(dir, textured_image(side, side, seed), {});
}

}  // namespace regkit::testing
