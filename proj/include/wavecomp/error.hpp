#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wavecomp {

// Every library failure derives from this. `what()` is prefixed with the
// module name, e.g. "codec: TruncatedStream: packet 2 ...".
class Error : public std::runtime_error {
 public:
  Error(std::string_view module, std::string_view kind, const std::string& detail);

  const std::string& module() const noexcept { return module_; }
  const std::string& kind_name() const noexcept { return kind_; }

 private:
  std::string module_;
  std::string kind_;
};

enum class WaveletErrc { EmptyImage, TooManyLevels, ShapeMismatch, BadResolution };

class WaveletError : public Error {
 public:
  WaveletError(WaveletErrc code, const std::string& detail);
  WaveletErrc code() const noexcept { return code_; }

 private:
  WaveletErrc code_;
};

enum class CodecErrc {
  BadMagic,
  UnsupportedVersion,
  CorruptHeader,
  TruncatedStream,
  CorruptBlock,
  StreamWriteFailure,
  BadResolution,
};

class CodecError : public Error {
 public:
  // packet/block are 1-based packet index and 0-based block index within
  // the packet; -1 when not applicable.
  CodecError(CodecErrc code, const std::string& detail, int packet = -1, int block = -1);
  CodecErrc code() const noexcept { return code_; }
  int packet() const noexcept { return packet_; }
  int block() const noexcept { return block_; }

 private:
  CodecErrc code_;
  int packet_;
  int block_;
};

enum class ImageErrc { UnreadableImage, WriteFailure, BadDimensions };

class ImageError : public Error {
 public:
  ImageError(ImageErrc code, const std::string& detail);
  ImageErrc code() const noexcept { return code_; }

 private:
  ImageErrc code_;
};

enum class ArchiveErrc {
  EmptyClass,
  UnreadableImage,
  DuplicateStem,
  FractionOutOfRange,
  BadManifest,
  BadIndex,
  GeometryMismatch,
};

class ArchiveError : public Error {
 public:
  ArchiveError(ArchiveErrc code, const std::string& detail);
  ArchiveErrc code() const noexcept { return code_; }

 private:
  ArchiveErrc code_;
};

enum class NnErrc { ShapeMismatch, NonFinite, BadCheckpoint, BadConfig, InputTooSmall };

class NnError : public Error {
 public:
  NnError(NnErrc code, const std::string& detail);
  NnErrc code() const noexcept { return code_; }

 private:
  NnErrc code_;
};

enum class ClassifierErrc { NonFiniteLoss, GeometryMismatch, BadConfig };

class ClassifierError : public Error {
 public:
  ClassifierError(ClassifierErrc code, const std::string& detail);
  ClassifierErrc code() const noexcept { return code_; }

 private:
  ClassifierErrc code_;
};

enum class MetricsErrc { EmptyMatrix, ShapeMismatch };

class MetricsError : public Error {
 public:
  MetricsError(MetricsErrc code, const std::string& detail);
  MetricsErrc code() const noexcept { return code_; }

 private:
  MetricsErrc code_;
};

enum class BenchErrc { NonPositiveTime, BadLevel, BadArgument };

class BenchError : public Error {
 public:
  BenchError(BenchErrc code, const std::string& detail);
  BenchErrc code() const noexcept { return code_; }

 private:
  BenchErrc code_;
};

}  // namespace wavecomp
