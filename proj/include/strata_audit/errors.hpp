#pragma once

#include <stdexcept>
#include <string>

namespace strata_audit {

// File ingestion failures (bad header, non-finite data, wrong rank).
// Carries the byte offset of the offending construct where known.
class IngestError : public std::runtime_error {
public:
    IngestError(std::string msg, long long byte_offset = -1)
        : std::runtime_error(std::move(msg)), byte_offset_(byte_offset) {}
    long long byte_offset() const noexcept { return byte_offset_; }

private:
    long long byte_offset_;
};

class MetaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LadderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GrowthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SegmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SynthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace strata_audit
