#include "lagdyn/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "lagdyn/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "container IO assumes a little-endian host");

namespace lagdyn::io {

namespace {

constexpr char kMagic[4] = {'L', 'D', 'T', 'C'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError("container truncated");
    return v;
}

} // namespace

int64_t NamedTensor::count() const {
    int64_t n = 1;
    for (int d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

Tensor NamedTensor::to_tensor() const {
    Tensor t(dims);
    if (dtype == DType::f32)
        for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(f32[static_cast<size_t>(i)]);
    else
        for (int64_t i = 0; i < t.size(); ++i) t[i] = f64[static_cast<size_t>(i)];
    return t;
}

const NamedTensor* Container::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

const NamedTensor& Container::require(const std::string& name) const {
    const NamedTensor* t = find(name);
    if (!t) throw DataError("container is missing tensor '" + name + "'");
    return *t;
}

std::string Container::meta_at(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw DataError("container metadata is missing key '" + key + "'");
    return it->second;
}

double Container::meta_double(const std::string& key) const {
    try {
        return std::stod(meta_at(key));
    } catch (const std::exception&) {
        throw DataError("container metadata key '" + key + "' is not a number");
    }
}

int64_t Container::meta_int(const std::string& key) const {
    try {
        return std::stoll(meta_at(key));
    } catch (const std::exception&) {
        throw DataError("container metadata key '" + key + "' is not an integer");
    }
}

void Container::add_f32(const std::string& name, const Tensor& t) {
    NamedTensor nt;
    nt.name = name;
    nt.dtype = DType::f32;
    nt.dims = t.shape();
    nt.f32.resize(static_cast<size_t>(t.size()));
    for (int64_t i = 0; i < t.size(); ++i) nt.f32[static_cast<size_t>(i)] = static_cast<float>(t[i]);
    tensors.push_back(std::move(nt));
}

void Container::add_f64(const std::string& name, const Tensor& t) {
    NamedTensor nt;
    nt.name = name;
    nt.dtype = DType::f64;
    nt.dims = t.shape();
    nt.f64 = t.raw();
    tensors.push_back(std::move(nt));
}

void write_container(const std::string& path, const Container& c) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_pod(os, kVersion);
    std::string meta;
    for (const auto& [k, v] : c.meta) meta += k + "=" + v + "\n";
    write_pod(os, static_cast<uint64_t>(meta.size()));
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    write_pod(os, static_cast<uint32_t>(c.tensors.size()));
    for (const auto& t : c.tensors) {
        write_pod(os, static_cast<uint32_t>(t.name.size()));
        os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        write_pod(os, static_cast<uint8_t>(t.dtype));
        write_pod(os, static_cast<uint8_t>(t.dims.size()));
        for (int d : t.dims) write_pod(os, static_cast<uint32_t>(d));
        if (t.dtype == DType::f32) {
            write_pod(os, static_cast<uint64_t>(t.f32.size() * sizeof(float)));
            os.write(reinterpret_cast<const char*>(t.f32.data()),
                     static_cast<std::streamsize>(t.f32.size() * sizeof(float)));
        } else {
            write_pod(os, static_cast<uint64_t>(t.f64.size() * sizeof(double)));
            os.write(reinterpret_cast<const char*>(t.f64.data()),
                     static_cast<std::streamsize>(t.f64.size() * sizeof(double)));
        }
    }
    if (!os) throw DataError("write to '" + path + "' failed");
}

Container read_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("'" + path + "' is not a tensor container (bad magic)");
    const uint32_t version = read_pod<uint32_t>(is);
    if (version != kVersion)
        throw DataError("'" + path + "' has unsupported container version " +
                        std::to_string(version));
    Container c;
    const uint64_t meta_len = read_pod<uint64_t>(is);
    std::string meta(meta_len, '\0');
    is.read(meta.data(), static_cast<std::streamsize>(meta_len));
    if (!is) throw DataError("container truncated in metadata");
    size_t pos = 0;
    while (pos < meta.size()) {
        size_t nl = meta.find('\n', pos);
        if (nl == std::string::npos) nl = meta.size();
        const std::string line = meta.substr(pos, nl - pos);
        pos = nl + 1;
        const size_t eq = line.find('=');
        if (eq != std::string::npos) c.meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const uint32_t n_tensors = read_pod<uint32_t>(is);
    for (uint32_t i = 0; i < n_tensors; ++i) {
        NamedTensor t;
        const uint32_t name_len = read_pod<uint32_t>(is);
        t.name.resize(name_len);
        is.read(t.name.data(), name_len);
        t.dtype = static_cast<DType>(read_pod<uint8_t>(is));
        const uint8_t ndim = read_pod<uint8_t>(is);
        for (uint8_t d = 0; d < ndim; ++d)
            t.dims.push_back(static_cast<int>(read_pod<uint32_t>(is)));
        const uint64_t bytes = read_pod<uint64_t>(is);
        const int64_t expect = t.count();
        const size_t elem = t.dtype == DType::f32 ? sizeof(float) : sizeof(double);
        if (bytes != static_cast<uint64_t>(expect) * elem)
            throw DataError("tensor '" + t.name + "' has inconsistent byte length");
        if (t.dtype == DType::f32) {
            t.f32.resize(static_cast<size_t>(expect));
            is.read(reinterpret_cast<char*>(t.f32.data()), static_cast<std::streamsize>(bytes));
        } else {
            t.f64.resize(static_cast<size_t>(expect));
            is.read(reinterpret_cast<char*>(t.f64.data()), static_cast<std::streamsize>(bytes));
        }
        if (!is) throw DataError("container truncated in tensor '" + t.name + "'");
        c.tensors.push_back(std::move(t));
    }
    return c;
}

uint64_t file_checksum(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "' for checksum");
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof(buf));
        const std::streamsize got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace lagdyn::io
