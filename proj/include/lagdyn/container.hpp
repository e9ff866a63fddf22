#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lagdyn/tensor.hpp"

namespace lagdyn::io {

// Binary tensor container: magic "LDTC", version, a key=value metadata
// block, then named tensors (32- or 64-bit little-endian floats, row-major).
// Datasets use f32 payloads, checkpoints f64; both round-trip bit-exactly.

enum class DType : uint8_t { f32 = 0, f64 = 1 };

struct NamedTensor {
    std::string name;
    DType dtype = DType::f64;
    std::vector<int> dims;
    std::vector<float> f32;
    std::vector<double> f64;

    int64_t count() const;
    /// Values as doubles regardless of storage type.
    Tensor to_tensor() const;
};

struct Container {
    std::map<std::string, std::string> meta;
    std::vector<NamedTensor> tensors;

    const NamedTensor* find(const std::string& name) const;
    const NamedTensor& require(const std::string& name) const;
    std::string meta_at(const std::string& key) const;
    double meta_double(const std::string& key) const;
    int64_t meta_int(const std::string& key) const;

    void add_f32(const std::string& name, const Tensor& t);
    void add_f64(const std::string& name, const Tensor& t);
};

void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

/// FNV-1a 64-bit hash of a file's bytes; recorded in run manifests.
uint64_t file_checksum(const std::string& path);

} // namespace lagdyn::io
