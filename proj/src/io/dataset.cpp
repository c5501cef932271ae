#include "mra/io/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numbers>

#include "mra/error.hpp"
#include "mra/io/files.hpp"
#include "mra/io/png.hpp"
#include "mra/random.hpp"

namespace mra::io {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSyntheticSeed = 0x5eed'da7a;

void append(LabeledImages& out, LabeledImages&& more) {
  for (auto& img : more.images) out.images.push_back(std::move(img));
  out.labels.insert(out.labels.end(), more.labels.begin(), more.labels.end());
}

void keep_classes(LabeledImages& set, int num_classes) {
  LabeledImages kept;
  for (int i = 0; i < set.size(); ++i) {
    if (set.labels[static_cast<std::size_t>(i)] < num_classes) {
      kept.images.push_back(std::move(set.images[static_cast<std::size_t>(i)]));
      kept.labels.push_back(set.labels[static_cast<std::size_t>(i)]);
    }
  }
  set = std::move(kept);
}

void truncate(LabeledImages& set, int limit) {
  if (limit > 0 && set.size() > limit) {
    set.images.resize(static_cast<std::size_t>(limit));
    set.labels.resize(static_cast<std::size_t>(limit));
  }
}

// ---- CIFAR-10 -------------------------------------------------------------

fs::path cifar_root(std::string_view rest) {
  if (!rest.empty()) return fs::path(rest);
  const char* env = std::getenv("MRA_DATA_DIR");
  if (env == nullptr || *env == '\0') {
    fail(ErrorKind::io, "cifar10: no directory given and MRA_DATA_DIR is not set");
  }
  const fs::path base(env);
  if (fs::exists(base / "cifar-10-batches-bin")) return base / "cifar-10-batches-bin";
  return base;
}

Dataset load_cifar(std::string_view rest) {
  const fs::path root = cifar_root(rest);
  if (!fs::is_directory(root)) fail(ErrorKind::io, "cifar10: directory '" + root.string() + "' not found");
  Dataset ds;
  ds.id = "cifar10";
  ds.num_classes = 10;
  ds.class_names = {"airplane", "automobile", "bird", "cat", "deer",
                    "dog", "frog", "horse", "ship", "truck"};
  for (int b = 1; b <= 5; ++b) {
    const fs::path file = root / ("data_batch_" + std::to_string(b) + ".bin");
    append(ds.train, parse_cifar_records(read_file(file), file.string()));
  }
  const fs::path test = root / "test_batch.bin";
  ds.eval = parse_cifar_records(read_file(test), test.string());
  return ds;
}

// ---- image folders --------------------------------------------------------

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".png")) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

LabeledImages read_class_tree(const fs::path& dir, const std::vector<std::string>& classes) {
  LabeledImages out;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const fs::path class_dir = dir / classes[c];
    if (!fs::is_directory(class_dir)) continue;
    for (const auto& file : sorted_entries(class_dir, false)) {
      out.images.push_back(read_png(file));
      out.labels.push_back(static_cast<int>(c));
    }
  }
  return out;
}

Dataset load_folder(std::string_view rest) {
  const fs::path root(rest);
  if (!fs::is_directory(root)) fail(ErrorKind::io, "folder dataset '" + root.string() + "' not found");
  Dataset ds;
  ds.id = "folder:" + root.string();
  const bool split = fs::is_directory(root / "train") && fs::is_directory(root / "eval");
  for (const auto& d : sorted_entries(split ? root / "train" : root, true)) {
    ds.class_names.push_back(d.filename().string());
  }
  ds.num_classes = static_cast<int>(ds.class_names.size());
  if (split) {
    ds.train = read_class_tree(root / "train", ds.class_names);
    ds.eval = read_class_tree(root / "eval", ds.class_names);
  } else {
    // Every fifth image of each class (in sorted order) is held out.
    const LabeledImages all = read_class_tree(root, ds.class_names);
    std::map<int, int> seen;
    for (int i = 0; i < all.size(); ++i) {
      const int label = all.labels[static_cast<std::size_t>(i)];
      auto& target = (seen[label]++ % 5 == 4) ? ds.eval : ds.train;
      target.images.push_back(all.images[static_cast<std::size_t>(i)]);
      target.labels.push_back(label);
    }
  }
  if (ds.train.size() == 0) fail(ErrorKind::io, "folder dataset '" + root.string() + "' is empty");
  const Image& first = ds.train.images.front();
  for (const auto* set : {&ds.train, &ds.eval}) {
    for (const auto& img : set->images) {
      if (!img.same_shape(first)) {
        fail(ErrorKind::corrupt_data, "folder dataset '" + root.string() + "' mixes image shapes");
      }
    }
  }
  return ds;
}

// ---- synthetic sets -------------------------------------------------------

float noise(Rng& rng, float scale) {
  return static_cast<float>((uniform01(rng) - 0.5) * 2.0 * scale);
}

Image two_blobs_image(int label, int side, Rng& rng) {
  static constexpr float kTint[2][3] = {{0.85f, 0.35f, 0.15f}, {0.15f, 0.35f, 0.85f}};
  Image img(side, side, 3);
  const double s = side;
  const double cy = (0.25 + 0.5 * uniform01(rng)) * s;
  const double cx = (0.25 + 0.5 * uniform01(rng)) * s;
  const double sigma = s * (0.12 + 0.06 * uniform01(rng));
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
      const float bump = static_cast<float>(std::exp(-d2 / (2 * sigma * sigma)));
      for (int c = 0; c < 3; ++c) {
        img(y, x, c) = std::clamp(0.1f + 0.8f * bump * kTint[label][c] + noise(rng, 0.05f), 0.0f, 1.0f);
      }
    }
  return img;
}

Image gradient_image(int label, int side, Rng& rng) {
  Image img(side, side, 3);
  const double theta = label * std::numbers::pi / 2 + (uniform01(rng) - 0.5) * std::numbers::pi / 4;
  const double ux = std::cos(theta);
  const double uy = std::sin(theta);
  double base[3], amp[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = 0.25 + 0.5 * uniform01(rng);
    amp[c] = 0.3 + 0.6 * uniform01(rng);
  }
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const double t = ux * (x / (side - 1.0) - 0.5) + uy * (y / (side - 1.0) - 0.5);
      for (int c = 0; c < 3; ++c) {
        img(y, x, c) = static_cast<float>(std::clamp(base[c] + amp[c] * t, 0.0, 1.0));
      }
    }
  return img;
}

bool inside_shape(int shape, double u, double v, double r) {
  const double au = std::abs(u);
  const double av = std::abs(v);
  switch (shape) {
    case 0: return u * u + v * v <= r * r;
    case 1: return au <= 0.8 * r && av <= 0.8 * r;
    case 2: return v <= 0.8 * r && au <= 0.55 * (v + r);
    case 3: return (au <= 0.3 * r && av <= r) || (av <= 0.3 * r && au <= r);
    case 4: {
      const double d = std::sqrt(u * u + v * v);
      return d <= r && d >= 0.55 * r;
    }
    case 5: return av <= 0.35 * r && au <= r;
    case 6: return au <= 0.35 * r && av <= r;
    case 7: return au + av <= r;
    case 8: return au <= r && av <= r && (std::abs(u - v) <= 0.3 * r || std::abs(u + v) <= 0.3 * r);
    default: {
      const double a = (u - 0.5 * r) * (u - 0.5 * r) + v * v;
      const double b = (u + 0.5 * r) * (u + 0.5 * r) + v * v;
      return std::min(a, b) <= 0.16 * r * r;
    }
  }
}

Image shape_image(int label, int side, Rng& rng) {
  Image img(side, side, 3);
  const double s = side;
  const double r = s * (0.24 + 0.08 * uniform01(rng));
  const double cy = s / 2 + (uniform01(rng) - 0.5) * s / 4;
  const double cx = s / 2 + (uniform01(rng) - 0.5) * s / 4;
  double bg0[3], bg1[3], fg[3];
  for (int c = 0; c < 3; ++c) {
    bg0[c] = 0.05 + 0.3 * uniform01(rng);
    bg1[c] = 0.05 + 0.3 * uniform01(rng);
    fg[c] = 0.55 + 0.45 * uniform01(rng);
  }
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const bool on = inside_shape(label, x + 0.5 - cx, y + 0.5 - cy, r);
      const double t = y / (s - 1.0);
      for (int c = 0; c < 3; ++c) {
        const double v = on ? fg[c] : bg0[c] * (1 - t) + bg1[c] * t;
        img(y, x, c) = std::clamp(static_cast<float>(v) + noise(rng, 0.04f), 0.0f, 1.0f);
      }
    }
  return img;
}

struct SyntheticSpec {
  std::string_view name;
  int num_classes;
  int train_size;
  int eval_size;
  Image (*make)(int label, int side, Rng& rng);
  std::vector<std::string> class_names;
};

const std::vector<SyntheticSpec>& synthetic_specs() {
  static const std::vector<SyntheticSpec> specs = {
      {"two-blobs", 2, 1000, 1000, two_blobs_image, {"warm", "cool"}},
      {"gradients", 4, 5000, 1000, gradient_image, {"east", "south", "west", "north"}},
      {"shapes10", 10, 5000, 10000, shape_image,
       {"disk", "square", "triangle", "plus", "ring", "hbar", "vbar", "diamond", "cross", "dots"}},
  };
  return specs;
}

Dataset load_synthetic(std::string_view name, const DatasetOptions& options) {
  for (const auto& spec : synthetic_specs()) {
    if (spec.name != name) continue;
    Dataset ds;
    ds.id = "synthetic:" + std::string(name);
    ds.num_classes = spec.num_classes;
    ds.class_names = spec.class_names;
    const int side = options.image_size > 0 ? options.image_size : 32;
    // Image i of a split depends only on (split, i), so subsets are prefixes.
    auto fill = [&](LabeledImages& out, std::uint64_t split, int count) {
      for (int i = 0; i < count; ++i) {
        const int label = i % spec.num_classes;
        Rng rng = make_rng(kSyntheticSeed, {split, static_cast<std::uint64_t>(i)});
        out.images.push_back(spec.make(label, side, rng));
        out.labels.push_back(label);
      }
    };
    fill(ds.train, 0, options.train_size > 0 ? options.train_size : spec.train_size);
    fill(ds.eval, 1, options.eval_size > 0 ? options.eval_size : spec.eval_size);
    return ds;
  }
  fail(ErrorKind::io, "unknown synthetic dataset '" + std::string(name) + "'");
}

}  // namespace

std::vector<std::string> synthetic_dataset_names() {
  std::vector<std::string> out;
  for (const auto& spec : synthetic_specs()) out.emplace_back(spec.name);
  return out;
}

LabeledImages parse_cifar_records(std::span<const std::byte> bytes, const std::string& source) {
  if (bytes.size() % kCifarRecordSize != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % kCifarRecordSize;
    fail(ErrorKind::corrupt_data, source + ": partial CIFAR record at byte offset " +
                                      std::to_string(offset) + " (file size " +
                                      std::to_string(bytes.size()) + " is not a multiple of " +
                                      std::to_string(kCifarRecordSize) + ")");
  }
  LabeledImages out;
  const std::size_t count = bytes.size() / kCifarRecordSize;
  out.images.reserve(count);
  out.labels.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    const std::byte* rec = bytes.data() + r * kCifarRecordSize;
    const int label = std::to_integer<int>(rec[0]);
    if (label > 9) {
      fail(ErrorKind::corrupt_data, source + ": label " + std::to_string(label) +
                                        " out of range at byte offset " +
                                        std::to_string(r * kCifarRecordSize));
    }
    Image img(32, 32, 3);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
          img(y, x, c) = std::to_integer<int>(rec[1 + c * 1024 + y * 32 + x]) / 255.0f;
        }
    out.images.push_back(std::move(img));
    out.labels.push_back(label);
  }
  return out;
}

Image resize_bilinear(const Image& image, int height, int width) {
  if (image.height() == height && image.width() == width) return image;
  Image out(height, width, image.channels());
  const double sy = double(image.height()) / height;
  const double sx = double(image.width()) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < image.channels(); ++c) {
        const double top = image(y0, x0, c) * (1 - wx) + image(y0, x1, c) * wx;
        const double bot = image(y1, x0, c) * (1 - wx) + image(y1, x1, c) * wx;
        out(y, x, c) = static_cast<float>(top * (1 - wy) + bot * wy);
      }
    }
  }
  return out;
}

Dataset load_dataset(std::string_view id, const DatasetOptions& options) {
  const auto colon = id.find(':');
  const std::string_view scheme = id.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : id.substr(colon + 1);
  Dataset ds;
  if (scheme == "cifar10") {
    ds = load_cifar(rest);
  } else if (scheme == "folder") {
    if (rest.empty()) fail(ErrorKind::config, "folder dataset needs a directory: folder:<dir>");
    ds = load_folder(rest);
  } else if (scheme == "synthetic") {
    ds = load_synthetic(rest, options);
  } else {
    fail(ErrorKind::config, "unknown dataset '" + std::string(id) +
                                "' (expected cifar10[:dir], folder:<dir> or synthetic:<name>)");
  }
  if (options.num_classes > 0 && options.num_classes < ds.num_classes) {
    keep_classes(ds.train, options.num_classes);
    keep_classes(ds.eval, options.num_classes);
    ds.num_classes = options.num_classes;
    ds.class_names.resize(static_cast<std::size_t>(options.num_classes));
  }
  truncate(ds.train, options.train_size);
  truncate(ds.eval, options.eval_size);
  if (options.image_size > 0) {
    for (auto* set : {&ds.train, &ds.eval})
      for (auto& img : set->images) img = resize_bilinear(img, options.image_size, options.image_size);
  }
  if (ds.train.size() == 0) fail(ErrorKind::io, "dataset '" + std::string(id) + "' is empty");
  return ds;
}

}  // namespace mra::io
