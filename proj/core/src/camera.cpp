#include "psd/camera.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "psd/error.hpp"
#include "psd/raster_io.hpp"

namespace psd {

void CameraIntrinsics::validate() const {
  if (!(std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) && std::isfinite(cy))) {
    throw ValueError("intrinsics must be finite");
  }
  if (!(fx > 0.0 && fy > 0.0)) throw ValueError("focal lengths must be positive");
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::istringstream fields(line);
  CameraIntrinsics k;
  std::string extra;
  if (!(fields >> k.fx >> k.fy >> k.cx >> k.cy) || (fields >> extra)) {
    throw FormatError(path.string() + ": expected 'fx fy cx cy'");
  }
  k.validate();
  return k;
}

void write_intrinsics(const CameraIntrinsics& k, const std::filesystem::path& path) {
  std::ostringstream out;
  out << std::setprecision(17) << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << '\n';
  const std::string text = out.str();
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

PointCloud backproject(const Raster& depth, const CameraIntrinsics& k, const SparseDepth* sparse) {
  k.validate();
  if (depth.channels() != 1) throw ValueError("depth must be single-channel");
  if (sparse != nullptr && !sparse->raster().same_dims(depth)) {
    throw ValueError("sparse depth and depth dims differ");
  }
  PointCloud cloud;
  cloud.height = depth.height();
  cloud.width = depth.width();
  cloud.points.resize(depth.pixel_count());
  cloud.measured.assign(depth.pixel_count(), 0);
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * depth.width() + u;
      const double d = depth.at_index(i);
      if (!(d > 0.0)) {
        throw ValueError("nonpositive depth " + std::to_string(d) + " at (" + std::to_string(v) +
                         ", " + std::to_string(u) + ")");
      }
      cloud.points[i] = {d * (u - k.cx) / k.fx, d * (v - k.cy) / k.fy, d};
      if (sparse != nullptr && sparse->measured(i)) cloud.measured[i] = 1;
    }
  }
  return cloud;
}

std::array<double, 2> project(const Point3& p, const CameraIntrinsics& k) {
  return {k.fx * p[0] / p[2] + k.cx, k.fy * p[1] / p[2] + k.cy};
}

}  // namespace psd
