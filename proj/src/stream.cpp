#include "toolsynth/stream.hpp"

#include "toolsynth/errors.hpp"
#include "toolsynth/manifest.hpp"
#include "toolsynth/parallel.hpp"
#include "toolsynth/png_io.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>

namespace toolsynth {

namespace fs = std::filesystem;

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof bytes);
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof bytes)) throw std::runtime_error("TSYN1: truncated record");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
  return v;
}

std::string numbered(std::size_t n) {
  std::string s = std::to_string(n);
  if (s.size() < 6) s.insert(0, 6 - s.size(), '0');
  return s + ".png";
}

}  // namespace

void for_each_batch(const Manifest& manifest, const fs::path& base_dir, const StreamOptions& options,
                    const std::function<void(const Batch&)>& fn) {
  if (options.batch_size < 1) throw ConfigError("stream: batch_size must be >= 1");
  if (options.batch_size > std::numeric_limits<std::uint16_t>::max())
    throw ConfigError("stream: batch_size exceeds the u16 count field");
  if (options.epochs < 0) throw ConfigError("stream: epochs must be >= 0");
  if (options.hybrid.use_epm && options.hybrid.epm.prob > 0 && options.batch_size < 2)
    throw ConfigError("stream: batch_size must be >= 2 when EPM is enabled");

  const std::size_t n = manifest.samples.size();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(options.seed, "epoch", {static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

    for (std::size_t start = 0, b = 0; start < n; start += options.batch_size, ++b) {
      const std::size_t count = std::min(options.batch_size, n - start);
      Batch batch;
      batch.epoch = epoch;
      batch.batch_index = static_cast<int>(b);
      batch.samples.resize(count);
      parallel_for(count, options.jobs, [&](std::size_t i) {
        const auto& rec = manifest.samples[order[start + i]];
        batch.samples[i] = SamplePair{load_image_png(base_dir / rec.image), load_mask_png(base_dir / rec.mask)};
      });
      try {
        validate(batch);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("stream: ") + e.what());
      }
      HybridConfig cfg = options.hybrid;
      if (count < 2) cfg.use_epm = false;
      Rng rng(derive_seed(options.seed, "batch", {static_cast<std::uint64_t>(epoch), b}));
      fn(hybrid(batch, cfg, rng));
    }
  }
}

void write_batch(std::ostream& sink, const Batch& batch) {
  put_le<std::uint32_t>(sink, static_cast<std::uint32_t>(batch.epoch));
  put_le<std::uint32_t>(sink, static_cast<std::uint32_t>(batch.batch_index));
  put_le<std::uint16_t>(sink, static_cast<std::uint16_t>(batch.samples.size()));
  for (const auto& s : batch.samples) {
    if (s.image.width() > 0xFFFF || s.image.height() > 0xFFFF)
      throw std::invalid_argument("stream: image dimensions exceed the u16 fields");
    put_le<std::uint16_t>(sink, static_cast<std::uint16_t>(s.image.width()));
    put_le<std::uint16_t>(sink, static_cast<std::uint16_t>(s.image.height()));
    put_le<std::uint8_t>(sink, static_cast<std::uint8_t>(s.image.channel_count()));
    sink.write(reinterpret_cast<const char*>(s.image.data().data()),
               static_cast<std::streamsize>(s.image.data().size()));
    sink.write(reinterpret_cast<const char*>(s.mask.data().data()),
               static_cast<std::streamsize>(s.mask.data().size()));
  }
  if (!sink) throw IoError("<stream>", "sink write failed");
}

std::size_t stream_batches(const Manifest& manifest, const fs::path& base_dir, const StreamOptions& options,
                           std::ostream& sink) {
  sink.write(kStreamMagic, sizeof kStreamMagic);
  if (!sink) throw IoError("<stream>", "sink write failed");
  std::size_t batches = 0;
  for_each_batch(manifest, base_dir, options, [&](const Batch& batch) {
    write_batch(sink, batch);
    ++batches;
  });
  sink.flush();
  if (!sink) throw IoError("<stream>", "sink flush failed");
  return batches;
}

Manifest write_augmented(const Manifest& manifest, const fs::path& base_dir, const StreamOptions& options,
                         const fs::path& out_dir) {
  Manifest out;
  out.spec = manifest.spec;
  out.master_seed = options.seed;
  std::size_t next = 0;
  for_each_batch(manifest, base_dir, options, [&](const Batch& batch) {
    for (const auto& s : batch.samples) {
      SampleRecord rec;
      rec.id = static_cast<int>(next);
      rec.image = "images/" + numbered(next);
      rec.mask = "masks/" + numbered(next);
      rec.source = "augmented";
      save_png(s.image, out_dir / rec.image);
      save_png(s.mask, out_dir / rec.mask);
      out.samples.push_back(std::move(rec));
      ++next;
    }
  });
  write_manifest(out, out_dir / "manifest.json");
  return out;
}

std::vector<DecodedBatch> decode_stream(std::istream& in) {
  char magic[sizeof kStreamMagic];
  if (!in.read(magic, sizeof magic)) {
    if (in.gcount() == 0) return {};
    throw std::runtime_error("TSYN1: truncated magic");
  }
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kStreamMagic)))
    throw std::runtime_error("TSYN1: bad magic");
  std::vector<DecodedBatch> batches;
  while (in.peek() != std::char_traits<char>::eof()) {
    DecodedBatch b;
    b.epoch = get_le<std::uint32_t>(in);
    b.batch_index = get_le<std::uint32_t>(in);
    const auto count = get_le<std::uint16_t>(in);
    for (std::uint16_t i = 0; i < count; ++i) {
      const int w = get_le<std::uint16_t>(in);
      const int h = get_le<std::uint16_t>(in);
      const int ch = get_le<std::uint8_t>(in);
      if (ch != 3 && ch != 4) throw std::runtime_error("TSYN1: bad channel count");
      std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * ch);
      std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h);
      if (!in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size())) ||
          !in.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(mask.size())))
        throw std::runtime_error("TSYN1: truncated record");
      b.samples.push_back(SamplePair{RasterImage(w, h, ch == 4 ? Channels::RGBA : Channels::RGB, std::move(pixels)),
                                     BinaryMask(w, h, std::move(mask))});
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

bool FdOutBuf::flush_buffer() {
  const char* p = pbase();
  std::size_t left = static_cast<std::size_t>(pptr() - pbase());
  while (left > 0) {
    const ssize_t n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  setp(buffer_, buffer_ + sizeof buffer_);
  return true;
}

FdOutBuf::int_type FdOutBuf::overflow(int_type ch) {
  if (!flush_buffer()) return traits_type::eof();
  if (!traits_type::eq_int_type(ch, traits_type::eof())) {
    *pptr() = traits_type::to_char_type(ch);
    pbump(1);
  }
  return traits_type::not_eof(ch);
}

int FdOutBuf::sync() { return flush_buffer() ? 0 : -1; }

int accept_one_connection(int port) {
  const int server = ::socket(AF_INET, SOCK_STREAM, 0);
  if (server < 0) throw IoError("tcp:" + std::to_string(port), std::strerror(errno));
  const int one = 1;
  ::setsockopt(server, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(server, 1) < 0) {
    const std::string err = std::strerror(errno);
    ::close(server);
    throw IoError("tcp:" + std::to_string(port), err);
  }
  const int client = ::accept(server, nullptr, nullptr);
  const std::string err = std::strerror(errno);
  ::close(server);
  if (client < 0) throw IoError("tcp:" + std::to_string(port), err);
  return client;
}

}  // namespace toolsynth
