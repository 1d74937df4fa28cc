#include "argus/codec.hpp"

#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <jpeglib.h>
#include <openssl/evp.h>
#include <png.h>

namespace argus {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CodecError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::span<const std::uint8_t> data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CodecError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw CodecError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_text(const fs::path& path, std::string_view text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngReadCursor {
  std::span<const std::uint8_t> data;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + len > cur->data.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->data.data() + cur->offset, len);
  cur->offset += len;
}

void png_write_to_vector(png_structp png, png_bytep in, png_size_t len) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + len);
}

void png_flush_noop(png_structp) {}

struct PngErrorState {
  char message[256] = {0};
};

void png_raise(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

bool is_png(std::span<const std::uint8_t> data) {
  return data.size() >= 8 && png_sig_cmp(data.data(), 0, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> data) {
  return data.size() >= 3 && data[0] == 0xFF && data[1] == 0xD8 && data[2] == 0xFF;
}

struct PngHeader {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::size_t rowbytes = 0;
};

// The phase functions below keep only POD state between setjmp and a
// possible longjmp out of libpng; buffers are owned by the caller.
bool png_read_header_phase(png_structp png, png_infop info, PngHeader* h, bool apply_transforms) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_info(png, info);
  h->width = static_cast<int>(png_get_image_width(png, info));
  h->height = static_cast<int>(png_get_image_height(png, info));
  if (!apply_transforms) return true;
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  h->channels = png_get_channels(png, info);
  h->bit_depth = png_get_bit_depth(png, info);
  h->rowbytes = png_get_rowbytes(png, info);
  return true;
}

bool png_read_rows_phase(png_structp png, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  return true;
}

class PngReader {
public:
  explicit PngReader(std::span<const std::uint8_t> data) : cursor_{data} {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_, png_raise, png_warn);
    if (!png_) throw CodecError("png: cannot allocate read struct");
    info_ = png_create_info_struct(png_);
    if (!info_) {
      png_destroy_read_struct(&png_, nullptr, nullptr);
      throw CodecError("png: cannot allocate info struct");
    }
    png_set_read_fn(png_, &cursor_, png_read_from_span);
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  Raster read() {
    PngHeader h;
    if (!png_read_header_phase(png_, info_, &h, true)) fail();
    if (h.channels != 1 && h.channels != 3) throw CodecError("png: unsupported channel layout");

    std::vector<std::uint8_t> buffer(h.rowbytes * h.height);
    std::vector<png_bytep> rows(h.height);
    for (int y = 0; y < h.height; ++y) rows[y] = buffer.data() + y * h.rowbytes;
    if (!png_read_rows_phase(png_, rows.data())) fail();

    Raster r;
    r.width = h.width;
    r.height = h.height;
    r.channels = h.channels;
    r.bit_depth = h.bit_depth;
    const std::size_t count = static_cast<std::size_t>(r.width) * r.height * r.channels;
    r.samples.resize(count);
    if (r.bit_depth == 16) {
      for (std::size_t i = 0; i < count; ++i) r.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    } else {
      for (std::size_t i = 0; i < count; ++i) r.samples[i] = buffer[i];
    }
    return r;
  }

  Dimensions header() {
    PngHeader h;
    if (!png_read_header_phase(png_, info_, &h, false)) fail();
    return {h.width, h.height};
  }

private:
  [[noreturn]] void fail() const { throw CodecError(std::string("png: ") + error_.message); }

  PngReadCursor cursor_;
  PngErrorState error_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

bool png_write_phase(png_structp png, png_infop info, int width, int height, int color_type, int bit_depth,
                     const std::uint8_t* packed, std::size_t rowbytes) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) png_write_row(png, const_cast<png_bytep>(packed + y * rowbytes));
  png_write_end(png, nullptr);
  return true;
}

Bytes write_png(int width, int height, int color_type, int bit_depth, const std::vector<std::uint8_t>& packed) {
  Bytes out;
  PngErrorState error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_raise, png_warn);
  if (!png) throw CodecError("png: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw CodecError("png: cannot allocate info struct");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  const bool ok = png_write_phase(png, info, width, height, color_type, bit_depth, packed.data(), rowbytes);
  png_destroy_write_struct(&png, &info);
  if (!ok) throw CodecError(std::string("png: ") + error.message);
  return out;
}

// ---------------------------------------------------------------------------
// JPEG

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_raise(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// All C++ objects live in the caller; this frame only touches POD state
// between setjmp and longjmp.
bool jpeg_decode_into(std::span<const std::uint8_t> data, Raster* out, bool header_only, JpegError* err) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err->mgr);
  err->mgr.error_exit = jpeg_raise;
  if (setjmp(err->jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
  jpeg_read_header(&cinfo, TRUE);
  out->width = static_cast<int>(cinfo.image_width);
  out->height = static_cast<int>(cinfo.image_height);
  out->channels = 3;
  out->bit_depth = 8;
  if (header_only) {
    jpeg_destroy_decompress(&cinfo);
    return true;
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
  std::uint16_t* dst = out->samples.data();
  JSAMPARRAY buffer = (*cinfo.mem->alloc_sarray)(reinterpret_cast<j_common_ptr>(&cinfo), JPOOL_IMAGE,
                                                 static_cast<JDIMENSION>(stride), 1);
  while (cinfo.output_scanline < cinfo.output_height) {
    jpeg_read_scanlines(&cinfo, buffer, 1);
    for (std::size_t i = 0; i < stride; ++i) *dst++ = buffer[0][i];
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Raster decode_jpeg(std::span<const std::uint8_t> data) {
  Raster r;
  JpegError err{};
  if (!jpeg_decode_into(data, &r, true, &err)) throw CodecError(std::string("jpeg: ") + err.message);
  r.samples.resize(static_cast<std::size_t>(r.width) * r.height * 3);
  if (!jpeg_decode_into(data, &r, false, &err)) throw CodecError(std::string("jpeg: ") + err.message);
  return r;
}

std::uint8_t to8(std::uint16_t v, int bit_depth) {
  return bit_depth == 16 ? static_cast<std::uint8_t>((v + 128) / 257) : static_cast<std::uint8_t>(v);
}

}  // namespace

Raster decode_raster(std::span<const std::uint8_t> data) {
  if (is_png(data)) {
    PngReader reader(data);
    return reader.read();
  }
  if (is_jpeg(data)) return decode_jpeg(data);
  throw CodecError("unrecognised image format");
}

Bytes encode_png_gray8(const Plane<std::uint8_t>& plane) {
  std::vector<std::uint8_t> packed(plane.data(), plane.data() + plane.size());
  return write_png(static_cast<int>(plane.cols()), static_cast<int>(plane.rows()), PNG_COLOR_TYPE_GRAY, 8, packed);
}

Bytes encode_png_gray16(const Plane<std::uint16_t>& plane) {
  std::vector<std::uint8_t> packed(static_cast<std::size_t>(plane.size()) * 2);
  for (Eigen::Index i = 0; i < plane.size(); ++i) {
    packed[2 * i] = static_cast<std::uint8_t>(plane.data()[i] >> 8);
    packed[2 * i + 1] = static_cast<std::uint8_t>(plane.data()[i] & 0xFF);
  }
  return write_png(static_cast<int>(plane.cols()), static_cast<int>(plane.rows()), PNG_COLOR_TYPE_GRAY, 16, packed);
}

Bytes encode_png_rgb(const ImageRgb& img) {
  return write_png(img.width, img.height, PNG_COLOR_TYPE_RGB, 8, img.pixels);
}

ImageRgb decode_image(std::span<const std::uint8_t> data) {
  const Raster r = decode_raster(data);
  ImageRgb img(r.width, r.height);
  const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int ch = 0; ch < 3; ++ch) {
      const std::uint16_t v = r.channels == 3 ? r.samples[3 * i + ch] : r.samples[i];
      img.pixels[3 * i + ch] = to8(v, r.bit_depth);
    }
  }
  return img;
}

Plane<std::uint8_t> decode_gray8(std::span<const std::uint8_t> data) {
  const Raster r = decode_raster(data);
  Plane<std::uint8_t> out(r.height, r.width);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (r.channels == 1) {
      out.data()[i] = to8(r.samples[i], r.bit_depth);
    } else {
      const double y = 0.299 * to8(r.samples[3 * i], r.bit_depth) + 0.587 * to8(r.samples[3 * i + 1], r.bit_depth) +
                       0.114 * to8(r.samples[3 * i + 2], r.bit_depth);
      out.data()[i] = static_cast<std::uint8_t>(std::lround(y));
    }
  }
  return out;
}

Plane<std::uint8_t> quantize_mask(const SoftMask& mask) {
  return (mask.cwiseMax(0.0).cwiseMin(1.0) * 255.0).round().cast<std::uint8_t>();
}

Bytes encode_mask_png(const SoftMask& mask) { return encode_png_gray8(quantize_mask(mask)); }

Bytes encode_mask_png(const BinMask& mask) {
  return encode_png_gray8(mask.select(Plane<std::uint8_t>::Constant(mask.rows(), mask.cols(), 255),
                                      Plane<std::uint8_t>::Zero(mask.rows(), mask.cols())));
}

SoftMask decode_mask_png(std::span<const std::uint8_t> data) { return decode_gray8(data).cast<double>() / 255.0; }

BinMask decode_gt_png(std::span<const std::uint8_t> data, int threshold) {
  return decode_gray8(data).cast<int>() >= threshold;
}

Bytes encode_depth_png(const DepthMap& depth) {
  const Plane<std::uint16_t> q = (depth.cwiseMax(0.0).cwiseMin(1.0) * 65535.0).round().cast<std::uint16_t>();
  return encode_png_gray16(q);
}

DepthMap decode_depth_png(std::span<const std::uint8_t> data) {
  const Raster r = decode_raster(data);
  if (r.channels != 1) throw CodecError("depth PNG must be single-channel");
  DepthMap out(r.height, r.width);
  const double full = r.bit_depth == 16 ? 65535.0 : 255.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = r.samples[i] / full;
  return out;
}

Bytes encode_depth_preview_png(const DepthMap& depth) { return encode_mask_png(depth); }

Dimensions probe_dimensions(const fs::path& path) {
  const Bytes data = read_file(path);
  if (is_png(data)) {
    PngReader reader(data);
    return reader.header();
  }
  if (is_jpeg(data)) {
    Raster r;
    JpegError err{};
    if (!jpeg_decode_into(data, &r, true, &err)) throw CodecError(std::string("jpeg: ") + err.message);
    return {r.width, r.height};
  }
  throw CodecError("unrecognised image format: " + path.string());
}

// ---------------------------------------------------------------------------
// base64 / digests

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    if (c != '\n' && c != '\r' && c != ' ') clean.push_back(c);
  }
  if (clean.size() % 4 != 0) throw CodecError("base64: length is not a multiple of 4");
  Bytes out(3 * clean.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
  if (n < 0) throw CodecError("base64: invalid input");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the bytes that padding stands in for
  if (!clean.empty() && clean.back() == '=') --len;
  if (clean.size() >= 2 && clean[clean.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string mask_digest(const SoftMask& mask) {
  const Plane<std::uint8_t> q = quantize_mask(mask);
  Bytes buf(q.data(), q.data() + q.size());
  const auto rows = static_cast<std::uint32_t>(mask.rows());
  const auto cols = static_cast<std::uint32_t>(mask.cols());
  for (int s = 0; s < 32; s += 8) {
    buf.push_back(static_cast<std::uint8_t>(rows >> s));
    buf.push_back(static_cast<std::uint8_t>(cols >> s));
  }
  return sha256_hex(buf).substr(0, 16);
}

}  // namespace argus
