#include "oneshot/image_io.hpp"

#include <png.h>

#include <array>
#include <cstdio>
#include <csetjmp>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

namespace oneshot {

ImageFormat sniff_format(std::span<const std::uint8_t> head) {
  static constexpr std::array<std::uint8_t, 8> kPng = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (head.size() >= kPng.size() && std::equal(kPng.begin(), kPng.end(), head.begin()))
    return ImageFormat::Png;
  if (head.size() >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF)
    return ImageFormat::Jpeg;
  return ImageFormat::Unknown;
}

ImageFormat sniff_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return ImageFormat::Unknown;
  std::array<std::uint8_t, 8> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  return sniff_format(std::span<const std::uint8_t>(head.data(), static_cast<std::size_t>(in.gcount())));
}

namespace {

Raster load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    fail(ErrorKind::Decode, "cannot decode PNG " + path.string() + ": " + image.message);
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  image.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  Raster out(static_cast<int>(image.width), static_cast<int>(image.height), alpha ? 4 : 3);
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::Decode, "cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Raster load_jpeg(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) fail(ErrorKind::Io, "cannot open " + path.string());

  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  Raster out;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorKind::Decode, "cannot decode JPEG " + path.string() + ": " + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out = Raster(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height), 3);
  const std::size_t stride = static_cast<std::size_t>(out.width) * 3;
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

}  // namespace

Raster load_image(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) fail(ErrorKind::Io, "no such file: " + path.string());
  switch (sniff_format(path)) {
    case ImageFormat::Png: return load_png(path);
    case ImageFormat::Jpeg: return load_jpeg(path);
    case ImageFormat::Unknown: break;
  }
  fail(ErrorKind::Decode, "not a PNG or JPEG file: " + path.string());
}

void save_png(const std::filesystem::path& path, const Raster& img) {
  validate(img);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 4 ? PNG_FORMAT_RGBA
                 : img.channels == 3 ? PNG_FORMAT_RGB
                                     : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr))
    fail(ErrorKind::Io, "cannot write PNG " + path.string() + ": " + image.message);
}

void write_outline_csv(std::ostream& out, const OutlineD& outline) {
  out << "x,y\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < outline.size(); ++i)
    out << outline.points(i, 0) << ',' << outline.points(i, 1) << '\n';
}

void write_colors_csv(std::ostream& out, std::span<const ColorD> colors) {
  out << "y,u,v\n" << std::setprecision(17);
  for (const auto& c : colors) out << c(0) << ',' << c(1) << ',' << c(2) << '\n';
}

}  // namespace oneshot
