#include "gbdl/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include <json.hpp>

namespace gbdl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string sibling_with_suffix(const std::string& json_path, const char* suffix) {
  fs::path p(json_path);
  p.replace_extension(suffix);
  return p.string();
}

void write_bytes(const std::string& path, const void* data, size_t size) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw DataError("short write to " + path);
}

std::vector<char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<char> buf(static_cast<size_t>(size));
  in.read(buf.data(), size);
  if (!in) throw DataError("short read from " + path);
  return buf;
}

json parse_json_file(const std::string& path) {
  const auto buf = read_bytes(path);
  try {
    return json::parse(buf.begin(), buf.end());
  } catch (const json::parse_error& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
}

}  // namespace

long Dataset::elements_per_frame() const {
  return static_cast<long>(side) * side * (dtype == "complex64" ? 2 : 1);
}

ComplexImage Dataset::frame(int t) const {
  if (t < 0 || t >= frames) throw DataError("dataset: frame index out of range");
  const double scale = intensity_scale > 0.0 ? intensity_scale : 1.0;
  ComplexImage img(side, side);
  const long per_frame = elements_per_frame();
  const float* base = payload.data() + static_cast<long>(t) * per_frame;
  if (dtype == "complex64") {
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) {
        const long k = 2 * (static_cast<long>(r) * side + c);
        img(r, c) = cd(base[k] / scale, base[k + 1] / scale);
      }
  } else {
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c)
        img(r, c) = cd(base[static_cast<long>(r) * side + c] / scale, 0.0);
  }
  return img;
}

Dataset load_dataset(const std::string& json_path) {
  const json j = parse_json_file(json_path);
  Dataset ds;
  try {
    ds.side = j.at("side").get<int>();
    ds.frames = j.at("frames").get<int>();
    ds.dtype = j.at("dtype").get<std::string>();
    ds.intensity_scale = j.at("intensity_scale").get<double>();
  } catch (const json::exception& e) {
    throw DataError(json_path + ": bad header: " + e.what());
  }
  if (ds.dtype != "real32" && ds.dtype != "complex64")
    throw DataError(json_path + ": unknown dtype " + ds.dtype);
  if (ds.side < 1 || ds.frames < 1) throw DataError(json_path + ": bad dimensions");
  const auto raw = read_bytes(sibling_with_suffix(json_path, ".raw"));
  const size_t expected =
      static_cast<size_t>(ds.frames) * static_cast<size_t>(ds.elements_per_frame()) * sizeof(float);
  if (raw.size() != expected)
    throw DataError(json_path + ": payload size mismatch");
  ds.payload.resize(raw.size() / sizeof(float));
  std::memcpy(ds.payload.data(), raw.data(), raw.size());
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& json_path) {
  const size_t expected =
      static_cast<size_t>(ds.frames) * static_cast<size_t>(ds.elements_per_frame());
  if (ds.payload.size() != expected) throw DataError("save_dataset: payload size mismatch");
  json j;
  j["side"] = ds.side;
  j["frames"] = ds.frames;
  j["dtype"] = ds.dtype;
  j["intensity_scale"] = ds.intensity_scale;
  const std::string text = j.dump(2) + "\n";
  write_bytes(json_path, text.data(), text.size());
  write_bytes(sibling_with_suffix(json_path, ".raw"), ds.payload.data(),
              ds.payload.size() * sizeof(float));
}

Dataset dataset_from_frames(const std::vector<ComplexImage>& images, const std::string& dtype) {
  if (images.empty()) throw DataError("dataset_from_frames: no frames");
  Dataset ds;
  ds.side = static_cast<int>(images[0].rows());
  ds.frames = static_cast<int>(images.size());
  ds.dtype = dtype;
  ds.intensity_scale = 1.0;
  ds.payload.reserve(static_cast<size_t>(ds.frames) *
                     static_cast<size_t>(ds.elements_per_frame()));
  for (const auto& img : images) {
    if (img.rows() != ds.side || img.cols() != ds.side)
      throw DataError("dataset_from_frames: inconsistent frame sizes");
    for (int r = 0; r < ds.side; ++r)
      for (int c = 0; c < ds.side; ++c) {
        if (dtype == "complex64") {
          ds.payload.push_back(static_cast<float>(img(r, c).real()));
          ds.payload.push_back(static_cast<float>(img(r, c).imag()));
        } else {
          ds.payload.push_back(static_cast<float>(img(r, c).real()));
        }
      }
  }
  return ds;
}

void save_mask(const SamplingMask& mask, const std::string& pgm_path) {
  const int n = mask.side();
  std::ostringstream head;
  head << "P5\n" << n << " " << n << "\n255\n";
  std::vector<unsigned char> body(static_cast<size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      body[static_cast<size_t>(r) * n + c] = mask.bits(r, c) ? 255 : 0;
  std::ofstream out(pgm_path, std::ios::binary);
  if (!out) throw DataError("cannot write " + pgm_path);
  out << head.str();
  out.write(reinterpret_cast<const char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
  json j;
  j["side"] = n;
  j["num_rays"] = mask.num_rays;
  j["rate"] = mask.rate();
  const std::string text = j.dump(2) + "\n";
  write_bytes(sibling_with_suffix(pgm_path, ".json"), text.data(), text.size());
}

SamplingMask load_mask(const std::string& pgm_path) {
  std::ifstream in(pgm_path, std::ios::binary);
  if (!in) throw DataError("cannot open " + pgm_path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 255 || w != h || w < 1)
    throw DataError(pgm_path + ": not a square 8-bit PGM");
  in.get();  // single whitespace after the header
  std::vector<unsigned char> body(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()));
  if (!in) throw DataError(pgm_path + ": truncated payload");
  SamplingMask mask;
  mask.bits = MaskGrid::Zero(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      mask.bits(r, c) = body[static_cast<size_t>(r) * w + c] >= 128 ? 1 : 0;
  const std::string side_json = sibling_with_suffix(pgm_path, ".json");
  if (fs::exists(side_json)) {
    const json j = parse_json_file(side_json);
    if (j.contains("num_rays")) mask.num_rays = j.at("num_rays").get<int>();
  }
  return mask;
}

namespace {

void write_mask_sidecar(const SamplingMask& mask, const std::string& for_path) {
  json j;
  j["side"] = mask.side();
  j["num_rays"] = mask.num_rays;
  j["rate"] = mask.rate();
  const std::string text = j.dump(2) + "\n";
  write_bytes(sibling_with_suffix(for_path, ".json"), text.data(), text.size());
}

}  // namespace

void save_mask_packed(const SamplingMask& mask, const std::string& bin_path) {
  const int n = mask.side();
  std::vector<unsigned char> packed((static_cast<size_t>(n) * n + 7) / 8, 0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const size_t idx = static_cast<size_t>(r) * n + c;
      if (mask.bits(r, c)) packed[idx / 8] |= static_cast<unsigned char>(1u << (idx % 8));
    }
  write_bytes(bin_path, packed.data(), packed.size());
  write_mask_sidecar(mask, bin_path);
}

SamplingMask load_mask_packed(const std::string& bin_path) {
  const json j = parse_json_file(sibling_with_suffix(bin_path, ".json"));
  const int n = j.at("side").get<int>();
  const auto packed = read_bytes(bin_path);
  if (packed.size() != (static_cast<size_t>(n) * n + 7) / 8)
    throw DataError(bin_path + ": packed size does not match the sidecar");
  SamplingMask mask;
  mask.bits = MaskGrid::Zero(n, n);
  if (j.contains("num_rays")) mask.num_rays = j.at("num_rays").get<int>();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const size_t idx = static_cast<size_t>(r) * n + c;
      mask.bits(r, c) =
          (static_cast<unsigned char>(packed[idx / 8]) >> (idx % 8)) & 1u;
    }
  return mask;
}

void save_kspace(const KSpaceFrame& frame, const std::string& json_path,
                 const std::string& mask_pgm_relative) {
  json j;
  j["side"] = frame.mask.side();
  j["frame_index"] = frame.frame_index;
  j["count"] = static_cast<long>(frame.values.size());
  j["noise_bound"] = frame.noise_bound;
  j["mask"] = mask_pgm_relative;
  const std::string text = j.dump(2) + "\n";
  write_bytes(json_path, text.data(), text.size());
  std::vector<double> vals(static_cast<size_t>(frame.values.size()) * 2);
  for (Eigen::Index k = 0; k < frame.values.size(); ++k) {
    vals[static_cast<size_t>(2 * k)] = frame.values(k).real();
    vals[static_cast<size_t>(2 * k + 1)] = frame.values(k).imag();
  }
  write_bytes(sibling_with_suffix(json_path, ".raw"), vals.data(),
              vals.size() * sizeof(double));
}

KSpaceFrame load_kspace(const std::string& json_path) {
  const json j = parse_json_file(json_path);
  KSpaceFrame frame;
  long count = 0;
  std::string mask_rel;
  try {
    frame.frame_index = j.at("frame_index").get<int>();
    frame.noise_bound = j.at("noise_bound").get<double>();
    count = j.at("count").get<long>();
    mask_rel = j.at("mask").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(json_path + ": bad header: " + e.what());
  }
  const fs::path mask_path = fs::path(json_path).parent_path() / mask_rel;
  frame.mask = load_mask(mask_path.string());
  if (frame.mask.ones() != count)
    throw DataError(json_path + ": value count does not match mask");
  const auto raw = read_bytes(sibling_with_suffix(json_path, ".raw"));
  if (raw.size() != static_cast<size_t>(count) * 2 * sizeof(double))
    throw DataError(json_path + ": payload size mismatch");
  frame.values.resize(count);
  const double* vals = reinterpret_cast<const double*>(raw.data());
  for (long k = 0; k < count; ++k)
    frame.values(k) = cd(vals[2 * k], vals[2 * k + 1]);
  return frame;
}

void write_png_gray(const RealImage& img, const std::string& path) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  // Filter byte 0 in front of every scanline.
  std::vector<unsigned char> scanlines(static_cast<size_t>(h) * (w + 1));
  for (int r = 0; r < h; ++r) {
    unsigned char* line = scanlines.data() + static_cast<size_t>(r) * (w + 1);
    line[0] = 0;
    for (int c = 0; c < w; ++c) {
      const double v = std::min(1.0, std::max(0.0, img(r, c)));
      line[1 + c] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
  }
  uLongf comp_bound = compressBound(static_cast<uLong>(scanlines.size()));
  std::vector<unsigned char> comp(comp_bound);
  if (compress2(comp.data(), &comp_bound, scanlines.data(),
                static_cast<uLong>(scanlines.size()), 6) != Z_OK)
    throw DataError("png: deflate failed");
  comp.resize(comp_bound);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  auto be32 = [](uint32_t v) {
    return std::array<unsigned char, 4>{static_cast<unsigned char>(v >> 24),
                                        static_cast<unsigned char>(v >> 16),
                                        static_cast<unsigned char>(v >> 8),
                                        static_cast<unsigned char>(v)};
  };
  auto chunk = [&](const char type[4], const unsigned char* data, size_t size) {
    const auto len = be32(static_cast<uint32_t>(size));
    out.write(reinterpret_cast<const char*>(len.data()), 4);
    std::vector<unsigned char> body(size + 4);
    std::memcpy(body.data(), type, 4);
    if (size) std::memcpy(body.data() + 4, data, size);
    out.write(reinterpret_cast<const char*>(body.data()),
              static_cast<std::streamsize>(body.size()));
    const uint32_t crc = static_cast<uint32_t>(
        crc32(0L, body.data(), static_cast<uInt>(body.size())));
    const auto crc_be = be32(crc);
    out.write(reinterpret_cast<const char*>(crc_be.data()), 4);
  };
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);
  unsigned char ihdr[13];
  const auto wbe = be32(static_cast<uint32_t>(w)), hbe = be32(static_cast<uint32_t>(h));
  std::memcpy(ihdr, wbe.data(), 4);
  std::memcpy(ihdr + 4, hbe.data(), 4);
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 0;   // grayscale
  ihdr[10] = ihdr[11] = ihdr[12] = 0;
  chunk("IHDR", ihdr, 13);
  chunk("IDAT", comp.data(), comp.size());
  chunk("IEND", nullptr, 0);
}

namespace {

// Tiny tagged binary writer/reader for the checkpoint blob.
struct BinWriter {
  std::ofstream out;
  explicit BinWriter(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw DataError("cannot write " + path);
  }
  template <typename T>
  void pod(const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void vec_i(const std::vector<int>& v) {
    pod<uint64_t>(v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(int)));
  }
  void vec_d(const std::vector<double>& v) {
    pod<uint64_t>(v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void mat(const Eigen::MatrixXd& m) {
    pod<int64_t>(m.rows());
    pod<int64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
  }
  void bmat(const BinaryMatrix& m) {
    pod<int64_t>(m.rows());
    pod<int64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size()));
  }
};

struct BinReader {
  std::ifstream in;
  explicit BinReader(const std::string& path) : in(path, std::ios::binary) {
    if (!in) throw DataError("cannot open " + path);
  }
  template <typename T>
  T pod() {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("checkpoint: truncated blob");
    return v;
  }
  std::vector<int> vec_i() {
    std::vector<int> v(pod<uint64_t>());
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(int)));
    if (!in) throw DataError("checkpoint: truncated blob");
    return v;
  }
  std::vector<double> vec_d() {
    std::vector<double> v(pod<uint64_t>());
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint: truncated blob");
    return v;
  }
  Eigen::MatrixXd mat() {
    const int64_t r = pod<int64_t>(), c = pod<int64_t>();
    Eigen::MatrixXd m(r, c);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw DataError("checkpoint: truncated blob");
    return m;
  }
  BinaryMatrix bmat() {
    const int64_t r = pod<int64_t>(), c = pod<int64_t>();
    BinaryMatrix m(r, c);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size()));
    if (!in) throw DataError("checkpoint: truncated blob");
    return m;
  }
};

}  // namespace

void save_checkpoint(const GibbsState& state, const PatchGrouping& grouping,
                     double sigma, const std::string& prefix) {
  json j;
  j["groups"] = state.groups.size();
  j["K"] = state.num_atoms;
  j["patch_dim"] = state.patch_dim;
  j["sweep_count"] = state.sweep_count;
  j["seed"] = state.seed;
  const std::string text = j.dump(2) + "\n";
  write_bytes(prefix + ".json", text.data(), text.size());

  BinWriter w(prefix + ".bin");
  w.pod<uint64_t>(0x4742444c43503031ULL);  // magic
  w.pod<double>(sigma);
  w.pod<int32_t>(grouping.num_groups);
  w.pod<int32_t>(grouping.guide_frame);
  w.vec_i(grouping.assignment);
  w.mat(grouping.centroids);
  w.pod<int32_t>(state.patch_dim);
  w.pod<int32_t>(state.num_atoms);
  w.pod<int64_t>(state.sweep_count);
  w.pod<uint64_t>(state.seed);
  w.pod<int32_t>(state.redraw_unused_after);
  const HyperParams& h = state.hyper;
  w.vec_d({h.c0, h.c1, h.eta0, h.e0, h.f0, h.g0, h.h0});
  w.pod<uint64_t>(state.groups.size());
  for (const auto& g : state.groups) {
    w.vec_i(g.members);
    w.mat(g.dict);
    w.bmat(g.z);
    w.mat(g.s);
    w.mat(g.pi_star);
    w.mat(g.pi);
    w.vec_d(std::vector<double>(g.eta.data(), g.eta.data() + g.eta.size()));
    w.vec_d(std::vector<double>(g.gamma_s.data(), g.gamma_s.data() + g.gamma_s.size()));
    w.pod<double>(g.gamma_eps);
    w.vec_i(std::vector<int>(g.unused_sweeps.data(),
                             g.unused_sweeps.data() + g.unused_sweeps.size()));
    w.pod<uint64_t>(g.dep_rows.size());
    for (const auto& row : g.dep_rows) {
      w.pod<uint64_t>(row.size());
      for (const auto& [idx, wt] : row) {
        w.pod<int32_t>(idx);
        w.pod<double>(wt);
      }
    }
    w.pod<uint64_t>(g.neigh.size());
    for (const auto& row : g.neigh) w.vec_i(row);
    uint64_t rs[4];
    g.rng.save_state(rs);
    for (uint64_t v : rs) w.pod<uint64_t>(v);
    w.pod<int64_t>(g.eta_fallbacks);
  }
}

Checkpoint load_checkpoint(const std::string& prefix) {
  BinReader r(prefix + ".bin");
  if (r.pod<uint64_t>() != 0x4742444c43503031ULL)
    throw DataError(prefix + ".bin: not a checkpoint");
  Checkpoint cp;
  cp.sigma = r.pod<double>();
  cp.grouping.num_groups = r.pod<int32_t>();
  cp.grouping.guide_frame = r.pod<int32_t>();
  cp.grouping.assignment = r.vec_i();
  cp.grouping.centroids = r.mat();
  GibbsState& st = cp.state;
  st.patch_dim = r.pod<int32_t>();
  st.num_atoms = r.pod<int32_t>();
  st.sweep_count = r.pod<int64_t>();
  st.seed = r.pod<uint64_t>();
  st.redraw_unused_after = r.pod<int32_t>();
  const auto hv = r.vec_d();
  if (hv.size() != 7) throw DataError("checkpoint: bad hyper block");
  st.hyper = HyperParams{hv[0], hv[1], hv[2], hv[3], hv[4], hv[5], hv[6]};
  st.groups.resize(r.pod<uint64_t>());
  for (auto& g : st.groups) {
    g.members = r.vec_i();
    g.dict = r.mat();
    g.z = r.bmat();
    g.s = r.mat();
    g.alpha = g.s.cwiseProduct(g.z.cast<double>());
    g.pi_star = r.mat();
    g.pi = r.mat();
    const auto eta = r.vec_d();
    g.eta = Eigen::Map<const Eigen::VectorXd>(eta.data(), static_cast<Eigen::Index>(eta.size()));
    const auto gs = r.vec_d();
    g.gamma_s = Eigen::Map<const Eigen::VectorXd>(gs.data(), static_cast<Eigen::Index>(gs.size()));
    g.gamma_eps = r.pod<double>();
    const auto un = r.vec_i();
    g.unused_sweeps =
        Eigen::Map<const Eigen::VectorXi>(un.data(), static_cast<Eigen::Index>(un.size()));
    g.dep_rows.resize(r.pod<uint64_t>());
    for (auto& row : g.dep_rows) {
      row.resize(r.pod<uint64_t>());
      for (auto& [idx, wt] : row) {
        idx = r.pod<int32_t>();
        wt = r.pod<double>();
      }
    }
    g.neigh.resize(r.pod<uint64_t>());
    for (auto& row : g.neigh) row = r.vec_i();
    uint64_t rs[4];
    for (auto& v : rs) v = r.pod<uint64_t>();
    g.rng.load_state(rs);
    g.eta_fallbacks = r.pod<int64_t>();
  }
  return cp;
}

void save_grouping(const PatchGrouping& grouping, const DependenceMatrix& dep,
                   const std::string& path) {
  BinWriter w(path);
  w.pod<uint64_t>(0x4742444c47503031ULL);
  w.pod<int32_t>(grouping.num_groups);
  w.pod<int32_t>(grouping.guide_frame);
  w.vec_i(grouping.assignment);
  w.mat(grouping.centroids);
  w.pod<double>(dep.sigma);
  w.pod<double>(dep.radius);
  w.pod<uint64_t>(dep.rows.size());
  for (const auto& row : dep.rows) {
    w.pod<uint64_t>(row.size());
    for (const auto& [idx, wt] : row) {
      w.pod<int32_t>(idx);
      w.pod<double>(wt);
    }
  }
}

void load_grouping(const std::string& path, PatchGrouping& grouping, DependenceMatrix& dep) {
  BinReader r(path);
  if (r.pod<uint64_t>() != 0x4742444c47503031ULL)
    throw DataError(path + ": not a grouping sidecar");
  grouping.num_groups = r.pod<int32_t>();
  grouping.guide_frame = r.pod<int32_t>();
  grouping.assignment = r.vec_i();
  grouping.centroids = r.mat();
  dep.sigma = r.pod<double>();
  dep.radius = r.pod<double>();
  dep.rows.resize(r.pod<uint64_t>());
  for (auto& row : dep.rows) {
    row.resize(r.pod<uint64_t>());
    for (auto& [idx, wt] : row) {
      idx = r.pod<int32_t>();
      wt = r.pod<double>();
    }
  }
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path) {
  if (!out_) throw DataError("cannot write " + path);
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ",";
    out_ << cells[i];
  }
  out_ << "\n";
  out_.flush();
}

std::string CsvWriter::num(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

}  // namespace gbdl
