#include "porogen/core/io.hpp"

#include <opencv2/imgcodecs.hpp>

namespace porogen {

RgbImage read_image(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw ValidationError("cannot read image: " + path.string());
    RgbImage img = RgbImage::zeros(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            img.at(x, y, 0) = row[x][2];
            img.at(x, y, 1) = row[x][1];
            img.at(x, y, 2) = row[x][0];
        }
    }
    return img;
}

void write_image(const std::filesystem::path& path, const RgbImage& image) {
    const RgbImage* src = &image;
    RgbImage converted;
    if (image.domain == Domain::Network) {
        converted = from_network_domain(image);
        src = &converted;
    }
    cv::Mat bgr(src->height, src->width, CV_8UC3);
    for (int y = 0; y < src->height; ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < src->width; ++x) {
            row[x][2] = static_cast<std::uint8_t>(src->at(x, y, 0) + 0.5f);
            row[x][1] = static_cast<std::uint8_t>(src->at(x, y, 1) + 0.5f);
            row[x][0] = static_cast<std::uint8_t>(src->at(x, y, 2) + 0.5f);
        }
    }
    if (!cv::imwrite(path.string(), bgr))
        throw ValidationError("cannot write image: " + path.string());
}

BinaryMask read_mask(const std::filesystem::path& path) {
    cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (gray.empty()) throw ValidationError("cannot read mask: " + path.string());
    BinaryMask mask = BinaryMask::filled(gray.cols, gray.rows, 0);
    for (int y = 0; y < gray.rows; ++y)
        for (int x = 0; x < gray.cols; ++x)
            mask.at(x, y) = gray.at<std::uint8_t>(y, x) >= 128 ? 1 : 0;
    return mask;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    cv::Mat gray(mask.height, mask.width, CV_8UC1);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            gray.at<std::uint8_t>(y, x) = mask.at(x, y) ? 255 : 0;
    if (!cv::imwrite(path.string(), gray))
        throw ValidationError("cannot write mask: " + path.string());
}

}  // namespace porogen
