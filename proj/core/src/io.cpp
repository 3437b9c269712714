#include "fsum/io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

#include "fsum/errors.hpp"

namespace fsum {

namespace {

ImageBuffer from_mat(const cv::Mat& mat) {
  ImageBuffer image(mat.cols, mat.rows, mat.channels() == 1 ? 1 : 3);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      if (mat.channels() == 1) {
        image.at(x, y) = mat.at<uchar>(y, x) / 255.0f;
      } else {
        // OpenCV stores BGR
        cv::Vec3b px = mat.at<cv::Vec3b>(y, x);
        image.at(x, y, 0) = px[2] / 255.0f;
        image.at(x, y, 1) = px[1] / 255.0f;
        image.at(x, y, 2) = px[0] / 255.0f;
      }
    }
  }
  return image;
}

cv::Mat to_mat(const ImageBuffer& image) {
  image.validate_shape();
  auto quant = [](float v) {
    return static_cast<uchar>(std::clamp(std::lround(v * 255.0f), 0l, 255l));
  };
  if (image.channels == 1) {
    cv::Mat mat(image.height, image.width, CV_8UC1);
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x)
        mat.at<uchar>(y, x) = quant(image.at(x, y));
    return mat;
  }
  cv::Mat mat(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      mat.at<cv::Vec3b>(y, x) =
          cv::Vec3b(quant(image.at(x, y, 2)), quant(image.at(x, y, 1)),
                    quant(image.at(x, y, 0)));
    }
  }
  return mat;
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw DataError("image file not found: " + path.string());
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError("failed to decode image: " + path.string());
  if (mat.channels() == 4) {
    cv::Mat rgb;
    cv::mixChannels({mat}, {rgb = cv::Mat(mat.rows, mat.cols, CV_8UC3)},
                    {0, 0, 1, 1, 2, 2});
    mat = rgb;
  }
  if (mat.depth() != CV_8U) {
    cv::Mat u8;
    mat.convertTo(u8, CV_8U, mat.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
    mat = u8;
  }
  ImageBuffer image = from_mat(mat);
  image.validate();
  return image;
}

void save_png(const ImageBuffer& image, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  if (!cv::imwrite(path.string(), to_mat(image)))
    throw DataError("failed to write PNG: " + path.string());
}

std::vector<uint8_t> encode_png(const ImageBuffer& image) {
  std::vector<uchar> buf;
  if (!cv::imencode(".png", to_mat(image), buf))
    throw DataError("PNG encoding failed");
  return std::vector<uint8_t>(buf.begin(), buf.end());
}

}  // namespace fsum
