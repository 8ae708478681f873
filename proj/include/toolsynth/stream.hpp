#pragma once

#include "toolsynth/compose.hpp"
#include "toolsynth/trainaug.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <streambuf>

namespace toolsynth {

// Batch feed over a manifest. Wire format (little-endian):
//   "TSYN1"
//   per batch: u32 epoch, u32 batch_index, u16 count,
//     per sample: u16 w, u16 h, u8 channels, image bytes (row-major,
//     interleaved), mask bytes (1 byte per pixel, {0,1})

inline constexpr char kStreamMagic[5] = {'T', 'S', 'Y', 'N', '1'};

struct StreamOptions {
  std::size_t batch_size = 8;
  int epochs = 1;
  HybridConfig hybrid;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Calls fn for every augmented batch in emission order. Epoch e visits the
/// samples in a permutation seeded by (seed, e); batch b of epoch e is
/// augmented with an rng seeded by (seed, e, b). Single-element batches skip EPM.
void for_each_batch(const Manifest& manifest, const std::filesystem::path& base_dir,
                    const StreamOptions& options, const std::function<void(const Batch&)>& fn);

void write_batch(std::ostream& sink, const Batch& batch);

/// Writes the magic and every batch. Returns the number of batches written.
std::size_t stream_batches(const Manifest& manifest, const std::filesystem::path& base_dir,
                           const StreamOptions& options, std::ostream& sink);

/// Offline form of the same feed: images/{n:06}.png, masks/{n:06}.png in
/// emission order plus manifest.json.
Manifest write_augmented(const Manifest& manifest, const std::filesystem::path& base_dir,
                         const StreamOptions& options, const std::filesystem::path& out_dir);

/// Decoder for the wire format; used by tests and tooling.
struct DecodedBatch {
  std::uint32_t epoch = 0;
  std::uint32_t batch_index = 0;
  std::vector<SamplePair> samples;
};

/// Throws std::runtime_error on a bad magic or truncated record.
std::vector<DecodedBatch> decode_stream(std::istream& in);

/// Output stream buffer over a POSIX file descriptor (socket or pipe).
class FdOutBuf : public std::streambuf {
 public:
  explicit FdOutBuf(int fd) : fd_(fd) { setp(buffer_, buffer_ + sizeof buffer_); }
  ~FdOutBuf() override { sync(); }

 protected:
  int_type overflow(int_type ch) override;
  int sync() override;

 private:
  bool flush_buffer();
  int fd_;
  char buffer_[1 << 16];
};

/// Listens on 0.0.0.0:port and returns the first accepted connection's fd.
int accept_one_connection(int port);

}  // namespace toolsynth
