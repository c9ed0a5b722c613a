#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace retsyn {

// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
  public:
    Sha256();
    void update(const void* data, std::size_t len);
    void update(std::string_view data) { update(data.data(), data.size()); }
    std::array<std::uint8_t, 32> digest();
    std::string hex_digest();

  private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::uint64_t total_len_ = 0;
    std::size_t buffer_len_ = 0;
    bool finalized_ = false;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace retsyn
