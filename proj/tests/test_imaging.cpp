#include <cstddef>
#include <cstdio>
// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include <fstream>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oneshot/image_io.hpp"
#include "oneshot/imaging.hpp"
#include "oneshot/similarity.hpp"
#include "oneshot/synthetic.hpp"
#include "oracles.hpp"

using namespace oneshot;

namespace {

OutlineD outline_of(std::initializer_list<std::array<double, 2>> pts) {
  OutlineD o;
  o.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::Index i = 0;
  for (const auto& p : pts) o.points.row(i++) << p[0], p[1];
  return o;
}

Raster gray(int w, int h, std::uint8_t v = 0) { return Raster(w, h, 1, v); }

BinaryRaster square_perimeter(int size, int lo, int hi) {
  BinaryRaster b(size, size);
  for (int i = lo; i <= hi; ++i) {
    b.set(i, lo);
    b.set(i, hi);
    b.set(lo, i);
    b.set(hi, i);
  }
  return b;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an oneshot::Error");
  return ErrorKind::InvalidArgument;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("oneshot_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_jpeg(const std::filesystem::path& path, const Raster& rgb) {
  FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f);
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = static_cast<JDIMENSION>(rgb.width);
  cinfo.image_height = static_cast<JDIMENSION>(rgb.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 100, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(rgb.data.data() + cinfo.next_scanline * rgb.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

}  // namespace

TEST_CASE("resize") {
  SUBCASE("identity keeps samples") {
    std::mt19937_64 gen(1);
    Raster img(256, 256, 3);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(gen());
    CHECK(resize(img, 256, 256) == img);
  }
  SUBCASE("constant stays constant") {
    Raster img(100, 80, 3);
    for (int y = 0; y < 80; ++y)
      for (int x = 0; x < 100; ++x) {
        img.at(x, y, 0) = 12;
        img.at(x, y, 1) = 200;
        img.at(x, y, 2) = 77;
      }
    const Raster out = resize(img, 256, 256);
    CHECK(out.width == 256);
    CHECK(out.height == 256);
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) {
        REQUIRE(out.at(x, y, 0) == 12);
        REQUIRE(out.at(x, y, 1) == 200);
        REQUIRE(out.at(x, y, 2) == 77);
      }
  }
  SUBCASE("2x1 upsampled to 4x1 by hand") {
    Raster img(2, 1, 1);
    img.data = {0, 255};
    const Raster out = resize(img, 4, 1);
    // Centers map to -0.25, 0.25, 0.75, 1.25 in source space (clamped).
    CHECK(out.data == std::vector<std::uint8_t>{0, 64, 191, 255});
    CHECK(std::is_sorted(out.data.begin(), out.data.end()));
  }
  SUBCASE("zero target rejected") {
    CHECK(kind_of([] { resize(gray(4, 4), 0, 4); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { resize(gray(4, 4), 4, 0); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("to_grayscale uses the luma row") {
  Raster img(3, 1, 3);
  img.data = {0, 0, 0, 255, 255, 255, 255, 0, 0};
  const Raster g = to_grayscale(img);
  CHECK(g.channels == 1);
  CHECK(g.data == std::vector<std::uint8_t>{0, 255, 76});

  Raster rgba(1, 1, 4);
  rgba.data = {255, 0, 0, 0};
  CHECK(to_grayscale(rgba).data[0] == 76);
}

TEST_CASE("binarize is strict") {
  Raster img(3, 1, 1);
  img.data = {0, 200, 127};
  CHECK(binarize(img, 127).data == std::vector<std::uint8_t>{0, 255, 0});

  Raster one(1, 1, 1);
  for (int v = 0; v <= 255; ++v) {
    one.data[0] = static_cast<std::uint8_t>(v);
    const auto b = binarize(one, 127).data[0];
    REQUIRE((b == 0 || b == 255));
    REQUIRE((b == 255) == (v > 127));
  }
}

TEST_CASE("canny_edges") {
  const CannyParams params;

  SUBCASE("uniform image has no edges") {
    CHECK(canny_edges(gray(32, 32, 100), params).count() == 0);
  }

  SUBCASE("vertical step gives a one-pixel-wide line") {
    Raster img = gray(64, 32);
    for (int y = 0; y < 32; ++y)
      for (int x = 32; x < 64; ++x) img.at(x, y) = 255;
    const BinaryRaster e = canny_edges(img, params);
    std::set<int> columns;
    for (int y = 0; y < 32; ++y) {
      int per_row = 0;
      for (int x = 0; x < 64; ++x)
        if (e.on(x, y)) {
          ++per_row;
          columns.insert(x);
        }
      REQUIRE(per_row == 1);
    }
    REQUIRE(columns.size() == 1);
    const int col = *columns.begin();
    CHECK((col == 31 || col == 32));
  }

  SUBCASE("disk edges lie on the true circle") {
    Raster img = gray(128, 128);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x)
        if (std::hypot(x + 0.5 - 64.0, y + 0.5 - 64.0) <= 30.0) img.at(x, y) = 255;
    const BinaryRaster e = canny_edges(img, params);
    CHECK(e.count() > 100);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x)
        if (e.on(x, y)) REQUIRE(std::abs(std::hypot(x + 0.5 - 64.0, y + 0.5 - 64.0) - 30.0) <= 2.0);
  }

  SUBCASE("random images give valid binary rasters") {
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 10; ++trial) {
      Raster img = gray(40, 30);
      for (auto& v : img.data) v = static_cast<std::uint8_t>(gen());
      const BinaryRaster e = canny_edges(img, params);
      CHECK_NOTHROW(validate(e));
    }
  }

  SUBCASE("raster smaller than the kernel is rejected") {
    CHECK(kind_of([&] { canny_edges(gray(4, 40), params); }) == ErrorKind::InvalidArgument);
  }

  SUBCASE("invalid parameters are rejected") {
    CHECK(kind_of([] { canny_edges(gray(16, 16), {1.4, 100, 50}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { canny_edges(gray(16, 16), {0.0, 50, 150}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { canny_edges(Raster(16, 16, 3), {}); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("extract_outline") {
  BinaryRaster center(3, 3);
  center.set(1, 1);
  OutlineD o = extract_outline(center);
  CHECK(o.size() == 1);
  CHECK(o.points(0, 0) == 1);
  CHECK(o.points(0, 1) == 1);
  CHECK(o.source_height == 1);

  BinaryRaster two(4, 4);
  two.set(0, 0);
  two.set(3, 2);
  o = extract_outline(two);
  REQUIRE(o.size() == 2);
  CHECK(o.points.row(0) == Eigen::RowVector2d(0, 0));
  CHECK(o.points.row(1) == Eigen::RowVector2d(3, 2));
  CHECK(o.source_height == 3);

  CHECK(kind_of([] { extract_outline(BinaryRaster(5, 5)); }) == ErrorKind::EmptyOutline);
}

TEST_CASE("center_by_median") {
  CHECK(center_by_median(outline_of({{0, 0}})).points.isZero());
  CHECK(center_by_median(outline_of({{4, -7}})).points.isZero());

  const OutlineD c = center_by_median(outline_of({{1, 1}, {3, 5}}));
  CHECK(c.points.row(0) == Eigen::RowVector2d(-1, -2));
  CHECK(c.points.row(1) == Eigen::RowVector2d(1, 2));

  const OutlineD sym = outline_of({{-2, 0}, {0, 0}, {2, 0}});
  CHECK(center_by_median(sym).points == sym.points);

  SUBCASE("idempotent with zero medians on random sets") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + static_cast<int>(gen() % 40);
      OutlineD o;
      o.points = PointSet<double>::Random(n, 2) * 100.0;
      const OutlineD once = center_by_median(o);
      const OutlineD twice = center_by_median(once);
      REQUIRE((twice.points - once.points).cwiseAbs().maxCoeff() <= 1e-9);
      for (int axis = 0; axis < 2; ++axis) {
        const auto col = once.points.col(axis);
        REQUIRE(std::abs(median(std::vector<double>(col.begin(), col.end()))) <= 1e-9);
      }
    }
  }
}

TEST_CASE("scale_outline_to_height") {
  const OutlineD o = outline_of({{0, 0}, {4, 10}, {-3, 5}});
  const OutlineD doubled = scale_outline_to_height(o, 20.0);
  CHECK(doubled.points.isApprox(o.points * 2.0));
  CHECK(scale_outline_to_height(o, 10.0).points == o.points);

  CHECK(kind_of([] { scale_outline_to_height(outline_of({{0, 3}, {5, 3}}), 10.0); }) ==
        ErrorKind::DegenerateOutline);
  CHECK(kind_of([&] { scale_outline_to_height(o, 0.0); }) == ErrorKind::InvalidArgument);

  SUBCASE("uniform scaling hits the target height") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> target(1.0, 500.0);
    for (int trial = 0; trial < 50; ++trial) {
      OutlineD r;
      r.points = PointSet<double>::Random(2 + static_cast<int>(gen() % 30), 2) * 50.0;
      if (y_extent(r) <= 0.0) continue;
      const double t = target(gen);
      const OutlineD s = scale_outline_to_height(r, t);
      REQUIRE(std::abs(y_extent(s) - t) <= 1e-9);
      REQUIRE(x_extent(s) / x_extent(r) == doctest::Approx(y_extent(s) / y_extent(r)).epsilon(1e-12));
    }
  }

  SUBCASE("pairwise normalization scales the shorter outline") {
    OutlineD a = outline_of({{0, 0}, {0, 10}});
    OutlineD b = outline_of({{0, 0}, {2, 40}});
    normalize_pair_heights(a, b);
    CHECK(y_extent(a) == doctest::Approx(40.0));
    CHECK(y_extent(b) == 40.0);
  }
}

TEST_CASE("interior_mask") {
  SUBCASE("5x5 perimeter square") {
    const BinaryRaster m = interior_mask(square_perimeter(5, 1, 3));
    CHECK(m.count() == 1);
    CHECK(m.on(2, 2));
  }
  SUBCASE("7x7 perimeter square") {
    const BinaryRaster m = interior_mask(square_perimeter(7, 1, 5));
    CHECK(m.count() == 9);
    for (int y = 2; y <= 4; ++y)
      for (int x = 2; x <= 4; ++x) CHECK(m.on(x, y));
  }
  SUBCASE("no outline means no interior") {
    CHECK(kind_of([] { interior_mask(BinaryRaster(6, 6)); }) == ErrorKind::EmptyMask);
  }
  SUBCASE("open contour has no interior") {
    BinaryRaster b = square_perimeter(7, 1, 5);
    b.set(3, 1, false);
    CHECK(kind_of([&] { interior_mask(b); }) == ErrorKind::EmptyMask);
  }
  SUBCASE("never marks border-connected background") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
      BinaryRaster b(12, 10);
      for (auto& v : b.data) v = (gen() % 3 == 0) ? BinaryRaster::kOn : 0;
      // Recursive flood from the border, independent of the library's queue.
      std::vector<int> reach(b.data.size(), 0);
      std::function<void(int, int)> visit = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= b.width || y >= b.height) return;
        const auto i = b.index(x, y);
        if (reach[i] || b.on(x, y)) return;
        reach[i] = 1;
        visit(x + 1, y);
        visit(x - 1, y);
        visit(x, y + 1);
        visit(x, y - 1);
      };
      for (int x = 0; x < b.width; ++x) {
        visit(x, 0);
        visit(x, b.height - 1);
      }
      for (int y = 0; y < b.height; ++y) {
        visit(0, y);
        visit(b.width - 1, y);
      }
      try {
        const BinaryRaster m = interior_mask(b);
        for (std::size_t i = 0; i < m.data.size(); ++i) {
          const bool expected = !reach[i] && b.data[i] == 0;
          REQUIRE((m.data[i] == BinaryRaster::kOn) == expected);
        }
      } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::EmptyMask);
        for (std::size_t i = 0; i < b.data.size(); ++i) REQUIRE((reach[i] || b.data[i]));
      }
    }
  }
}

TEST_CASE("dilate grows by the radius") {
  BinaryRaster b(9, 9);
  b.set(4, 4);
  CHECK(dilate(b, 0) == b);
  CHECK(dilate(b, 1).count() == 9);
  CHECK(dilate(b, 3).count() == 49);
}

TEST_CASE("rgb_to_yuv") {
  using V3 = Eigen::Vector3d;
  CHECK(rgb_to_yuv(V3(0, 0, 0)).isZero());

  const auto white = rgb_to_yuv(V3(255, 255, 255));
  CHECK(white(0) == doctest::Approx(255.0).epsilon(1e-12));
  CHECK(std::abs(white(1) - 0.00255) <= 1e-9);
  CHECK(std::abs(white(2)) <= 1e-9);

  const auto red = rgb_to_yuv(V3(255, 0, 0));
  CHECK(std::abs(red(0) - 76.245) <= 1e-9);
  CHECK(std::abs(red(1) + 37.51815) <= 1e-9);
  CHECK(std::abs(red(2) - 156.825) <= 1e-9);

  SUBCASE("matches explicit dot products") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> c(0.0, 255.0);
    for (int trial = 0; trial < 100; ++trial) {
      const V3 rgb(c(gen), c(gen), c(gen));
      const auto ref = oracle::yuv(rgb(0), rgb(1), rgb(2));
      const auto got = rgb_to_yuv(rgb);
      for (int i = 0; i < 3; ++i) REQUIRE(std::abs(got(i) - ref[static_cast<std::size_t>(i)]) <= 1e-9);
    }
  }

  SUBCASE("linear") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> c(-300.0, 300.0);
    for (int trial = 0; trial < 100; ++trial) {
      const V3 c1(c(gen), c(gen), c(gen));
      const V3 c2(c(gen), c(gen), c(gen));
      const double a = c(gen) / 100.0;
      const double b = c(gen) / 100.0;
      const auto lhs = rgb_to_yuv(V3(a * c1 + b * c2));
      const auto rhs = a * rgb_to_yuv(c1) + b * rgb_to_yuv(c2);
      REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }

  SUBCASE("gray inputs have almost no chroma") {
    for (int v = 0; v <= 255; ++v) {
      const auto yuv = rgb_to_yuv(V3(v, v, v));
      REQUIRE(std::abs(yuv(1)) <= 0.01 * v + 1e-12);
      REQUIRE(std::abs(yuv(2)) <= 1e-6);
    }
  }

  SUBCASE("float scalar instantiation") {
    const auto f = rgb_to_yuv(Eigen::Vector3f(255.f, 0.f, 0.f));
    CHECK(f(0) == doctest::Approx(76.245).epsilon(1e-5));
  }
}

TEST_CASE("average_color") {
  Raster img(2, 1, 4);
  img.data = {10, 20, 30, 255, 30, 20, 10, 255};
  BinaryRaster first(2, 1);
  first.set(0, 0);
  CHECK(average_color(img, first).isApprox(rgb_to_yuv(Eigen::Vector3d(10, 20, 30))));

  BinaryRaster both(2, 1);
  both.set(0, 0);
  both.set(1, 0);
  CHECK(average_color(img, both).isApprox(rgb_to_yuv(Eigen::Vector3d(20, 20, 20))));

  img.data = {10, 20, 30, 255, 90, 90, 90, 0};
  CHECK(average_color(img, both).isApprox(rgb_to_yuv(Eigen::Vector3d(10, 20, 30))));

  img.data[3] = 0;
  CHECK(kind_of([&] { average_color(img, both); }) == ErrorKind::NoSample);
  CHECK(kind_of([&] { average_color(img, BinaryRaster(2, 1)); }) == ErrorKind::NoSample);
  CHECK(kind_of([&] { average_color(img, BinaryRaster(3, 1)); }) == ErrorKind::InvalidArgument);

  SUBCASE("luma stays in range") {
    Raster rgb(1, 1, 3);
    rgb.data = {255, 255, 255};
    BinaryRaster m(1, 1);
    m.set(0, 0);
    const auto c = average_color(rgb, m);
    CHECK(c(0) >= 0.0);
    CHECK(c(0) <= 255.0 + 1e-9);
  }
}

TEST_CASE("preprocess fingerprint") {
  PreprocessConfig a;
  PreprocessConfig b;
  CHECK(fingerprint(a) == fingerprint(b));
  CHECK(fingerprint(a).size() == 16);
  b.canvas = 128;
  CHECK(fingerprint(a) != fingerprint(b));
  b = a;
  b.height_mode = HeightMode::Global;
  CHECK(fingerprint(a) != fingerprint(b));
  b = a;
  b.canny.gaussian_sigma = 1.4000000001;
  CHECK(fingerprint(a) != fingerprint(b));
}

TEST_CASE("extract_attributes on a rendered shape") {
  const synthetic::Rgb color{200, 60, 40};
  const Raster img = synthetic::render(synthetic::Shape::Circle, color, {}, 256);
  const ImageAttributes a = extract_attributes(img, {});
  CHECK(a.outline.size() > 100);
  for (int axis = 0; axis < 2; ++axis) {
    const auto col = a.outline.points.col(axis);
    CHECK(std::abs(median(std::vector<double>(col.begin(), col.end()))) <= 1e-9);
  }
  // Interior pixels are exactly the fill color.
  CHECK(a.color.isApprox(rgb_to_yuv(Eigen::Vector3d(200, 60, 40)), 1e-9));

  SUBCASE("scale and translation barely move the features") {
    const Raster moved = synthetic::render(synthetic::Shape::Circle, color, {1.04, 3, -2}, 256);
    const ImageAttributes b = extract_attributes(moved, {});
    OutlineD oa = a.outline, ob = b.outline;
    normalize_pair_heights(oa, ob);
    CHECK(modified_hausdorff(oa, ob) < 2.0);
    CHECK((a.color - b.color).norm() < 1e-9);
  }

  SUBCASE("ring falls back when the interior is transparent") {
    // A thin ring leaves only its transparent hole enclosed once edges eat the body.
    Raster ring(64, 64, 4);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const double d = std::hypot(x + 0.5 - 32, y + 0.5 - 32);
        if (d <= 20 && d >= 18) {
          ring.at(x, y, 0) = 250;
          ring.at(x, y, 1) = 250;
          ring.at(x, y, 3) = 255;
        }
      }
    PreprocessConfig cfg;
    cfg.canvas = 64;
    CHECK_NOTHROW(extract_attributes(ring, cfg));
  }
}

TEST_CASE("image io") {
  const auto dir = temp_dir("io");
  Raster rgba(5, 4, 4);
  std::mt19937_64 gen(6);
  for (auto& v : rgba.data) v = static_cast<std::uint8_t>(gen());
  save_png(dir / "a.png", rgba);
  CHECK(sniff_format(dir / "a.png") == ImageFormat::Png);
  CHECK(load_image(dir / "a.png") == rgba);

  Raster rgb(5, 4, 3);
  for (auto& v : rgb.data) v = static_cast<std::uint8_t>(gen());
  save_png(dir / "b.png", rgb);
  CHECK(load_image(dir / "b.png") == rgb);

  Raster flat(16, 16, 3);
  for (std::size_t i = 0; i < flat.data.size(); i += 3) {
    flat.data[i] = 200;
    flat.data[i + 1] = 100;
    flat.data[i + 2] = 50;
  }
  write_jpeg(dir / "c.jpg", flat);
  CHECK(sniff_format(dir / "c.jpg") == ImageFormat::Jpeg);
  const Raster jpg = load_image(dir / "c.jpg");
  CHECK(jpg.width == 16);
  CHECK(jpg.channels == 3);
  for (std::size_t i = 0; i < jpg.data.size(); ++i) REQUIRE(std::abs(jpg.data[i] - flat.data[i]) <= 3);

  {
    std::ofstream txt(dir / "notes.txt");
    txt << "hello";
  }
  CHECK(sniff_format(dir / "notes.txt") == ImageFormat::Unknown);
  CHECK(kind_of([&] { load_image(dir / "notes.txt"); }) == ErrorKind::Decode);
  CHECK(kind_of([&] { load_image(dir / "missing.png"); }) == ErrorKind::Io);

  std::ostringstream csv;
  write_outline_csv(csv, outline_of({{1, 2}, {-0.5, 3}}));
  CHECK(csv.str() == "x,y\n1,2\n-0.5,3\n");
  std::ostringstream colors;
  const std::vector<ColorD> cs = {ColorD(1, 2, 3)};
  write_colors_csv(colors, cs);
  CHECK(colors.str() == "y,u,v\n1,2,3\n");
}
