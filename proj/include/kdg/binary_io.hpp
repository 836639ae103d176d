#pragma once

// Little-endian encoding helpers for the checkpoint and dataset formats.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace kdg::bin {

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.insert(out.end(), bytes, bytes + sizeof(T));
}

inline void put_magic(std::vector<std::uint8_t>& out, const char (&magic)[5]) {
    out.insert(out.end(), magic, magic + 4);
}

// Cursor over a byte buffer. get() returns false when the buffer is short.
class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

    template <typename T>
    bool get(T& value) {
        if (remaining() < sizeof(T)) return false;
        std::uint8_t bytes[sizeof(T)];
        std::memcpy(bytes, buf_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
        std::memcpy(&value, bytes, sizeof(T));
        pos_ += sizeof(T);
        return true;
    }

    bool magic_is(const char (&magic)[5]) {
        if (remaining() < 4 || std::memcmp(buf_.data() + pos_, magic, 4) != 0) return false;
        pos_ += 4;
        return true;
    }

    std::size_t remaining() const { return buf_.size() - pos_; }
    std::size_t position() const { return pos_; }

private:
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace kdg::bin
