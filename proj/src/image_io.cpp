#include "jpil/error.hpp"
#include "jpil/mesh_io.hpp"
#include "jpil/spherical.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace jpil {

std::string encode_png(const SphericalImage& image) {
  const int type = image.channels == 3 ? CV_8UC3 : CV_8UC1;
  cv::Mat mat(image.height, image.width, type, const_cast<std::uint8_t*>(image.pixels.data()));
  cv::Mat bgr;
  if (image.channels == 3) {
    cv::cvtColor(mat, bgr, cv::COLOR_RGB2BGR);
  } else {
    bgr = mat;
  }
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", bgr, buf)) throw Error(ErrorKind::Internal, "PNG encoding failed");
  return {buf.begin(), buf.end()};
}

SphericalImage decode_image(std::span<const std::byte> bytes) {
  if (bytes.empty()) throw Error(ErrorKind::Parse, "empty image payload at byte 0");
  const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<std::byte*>(bytes.data()));
  const cv::Mat decoded = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
  if (decoded.empty()) throw Error(ErrorKind::Parse, "undecodable image payload at byte 0");
  if (decoded.depth() != CV_8U) throw Error(ErrorKind::Parse, "only 8-bit images are supported");

  cv::Mat out;
  SphericalImage img;
  switch (decoded.channels()) {
    case 1:
      out = decoded;
      img.channels = 1;
      break;
    case 3:
      cv::cvtColor(decoded, out, cv::COLOR_BGR2RGB);
      img.channels = 3;
      break;
    case 4:
      cv::cvtColor(decoded, out, cv::COLOR_BGRA2RGB);
      img.channels = 3;
      break;
    default:
      throw Error(ErrorKind::Parse, "unsupported channel count");
  }
  out = out.clone();  // continuous
  img.width = out.cols;
  img.height = out.rows;
  img.pixels.assign(out.data, out.data + out.total() * out.elemSize());
  return img;
}

void write_png(const std::filesystem::path& path, const SphericalImage& image) {
  write_file(path, encode_png(image));
}

SphericalImage read_image(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  return decode_image(as_bytes(data));
}

}  // namespace jpil
