#include "wavecomp/error.hpp"

namespace wavecomp {

namespace {

std::string format(std::string_view module, std::string_view kind, const std::string& detail) {
  std::string out;
  out.reserve(module.size() + kind.size() + detail.size() + 4);
  out.append(module).append(": ").append(kind);
  if (!detail.empty()) out.append(": ").append(detail);
  return out;
}

const char* name(WaveletErrc c) {
  switch (c) {
    case WaveletErrc::EmptyImage: return "EmptyImage";
    case WaveletErrc::TooManyLevels: return "TooManyLevels";
    case WaveletErrc::ShapeMismatch: return "ShapeMismatch";
    case WaveletErrc::BadResolution: return "BadResolution";
  }
  return "?";
}

const char* name(CodecErrc c) {
  switch (c) {
    case CodecErrc::BadMagic: return "BadMagic";
    case CodecErrc::UnsupportedVersion: return "UnsupportedVersion";
    case CodecErrc::CorruptHeader: return "CorruptHeader";
    case CodecErrc::TruncatedStream: return "TruncatedStream";
    case CodecErrc::CorruptBlock: return "CorruptBlock";
    case CodecErrc::StreamWriteFailure: return "StreamWriteFailure";
    case CodecErrc::BadResolution: return "BadResolution";
  }
  return "?";
}

const char* name(ImageErrc c) {
  switch (c) {
    case ImageErrc::UnreadableImage: return "UnreadableImage";
    case ImageErrc::WriteFailure: return "WriteFailure";
    case ImageErrc::BadDimensions: return "BadDimensions";
  }
  return "?";
}

const char* name(ArchiveErrc c) {
  switch (c) {
    case ArchiveErrc::EmptyClass: return "EmptyClass";
    case ArchiveErrc::UnreadableImage: return "UnreadableImage";
    case ArchiveErrc::DuplicateStem: return "DuplicateStem";
    case ArchiveErrc::FractionOutOfRange: return "FractionOutOfRange";
    case ArchiveErrc::BadManifest: return "BadManifest";
    case ArchiveErrc::BadIndex: return "BadIndex";
    case ArchiveErrc::GeometryMismatch: return "GeometryMismatch";
  }
  return "?";
}

const char* name(NnErrc c) {
  switch (c) {
    case NnErrc::ShapeMismatch: return "ShapeMismatch";
    case NnErrc::NonFinite: return "NonFinite";
    case NnErrc::BadCheckpoint: return "BadCheckpoint";
    case NnErrc::BadConfig: return "BadConfig";
    case NnErrc::InputTooSmall: return "InputTooSmall";
  }
  return "?";
}

const char* name(ClassifierErrc c) {
  switch (c) {
    case ClassifierErrc::NonFiniteLoss: return "NonFiniteLoss";
    case ClassifierErrc::GeometryMismatch: return "GeometryMismatch";
    case ClassifierErrc::BadConfig: return "BadConfig";
  }
  return "?";
}

const char* name(MetricsErrc c) {
  switch (c) {
    case MetricsErrc::EmptyMatrix: return "EmptyMatrix";
    case MetricsErrc::ShapeMismatch: return "ShapeMismatch";
  }
  return "?";
}

const char* name(BenchErrc c) {
  switch (c) {
    case BenchErrc::NonPositiveTime: return "NonPositiveTime";
    case BenchErrc::BadLevel: return "BadLevel";
    case BenchErrc::BadArgument: return "BadArgument";
  }
  return "?";
}

}  // namespace

Error::Error(std::string_view module, std::string_view kind, const std::string& detail)
    : std::runtime_error(format(module, kind, detail)), module_(module), kind_(kind) {}

WaveletError::WaveletError(WaveletErrc code, const std::string& detail)
    : Error("wavelet", name(code), detail), code_(code) {}

CodecError::CodecError(CodecErrc code, const std::string& detail, int packet, int block)
    : Error("codec", name(code), detail), code_(code), packet_(packet), block_(block) {}

ImageError::ImageError(ImageErrc code, const std::string& detail)
    : Error("image", name(code), detail), code_(code) {}

ArchiveError::ArchiveError(ArchiveErrc code, const std::string& detail)
    : Error("archive", name(code), detail), code_(code) {}

NnError::NnError(NnErrc code, const std::string& detail)
    : Error("tensor-nn", name(code), detail), code_(code) {}

ClassifierError::ClassifierError(ClassifierErrc code, const std::string& detail)
    : Error("classifier", name(code), detail), code_(code) {}

MetricsError::MetricsError(MetricsErrc code, const std::string& detail)
    : Error("metrics", name(code), detail), code_(code) {}

BenchError::BenchError(BenchErrc code, const std::string& detail)
    : Error("bench", name(code), detail), code_(code) {}

}  // namespace wavecomp
