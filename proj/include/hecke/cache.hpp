#pragma once

// On-disk right-coset table cache. One JSON file per (N, label), named by a
// FNV-1a hash of that pair. Entries are re-validated on load; anything that
// fails is deleted and recomputed by the caller.

#include "hecke/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace hecke {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class FileTableStore : public TableStore {
public:
  struct Stats {
    std::size_t hits = 0, misses = 0, discarded = 0, written = 0;
  };

  explicit FileTableStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec)
      throw Error("cannot create cache directory " + dir_.string() + ": " + ec.message());
  }

  std::filesystem::path path_for(const Level &level, const OrthoDoubleCosetLabel &label) const {
    std::ostringstream name;
    name << "table-" << std::hex << std::setw(16) << std::setfill('0')
         << fnv1a("N=" + std::to_string(level.n()) + ";" + label.str()) << ".json";
    return dir_ / name.str();
  }

  std::optional<RightCosetTable> load(const Level &level, const OrthoDoubleCosetLabel &label) override {
    std::lock_guard lock(mutex_);
    const auto path = path_for(level, label);
    std::ifstream in(path);
    if (!in) {
      ++stats_.misses;
      return std::nullopt;
    }
    try {
      const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      auto t = io::table_from_json(io::parse_text(text), level, label);
      ++stats_.hits;
      return t;
    } catch (const std::exception &e) {
      ++stats_.discarded;
      last_discard_ = path.string() + ": " + e.what();
      in.close();
      std::filesystem::remove(path);
      return std::nullopt;
    }
  }

  void store(const Level &level, const RightCosetTable &table) override {
    std::lock_guard lock(mutex_);
    const auto path = path_for(level, table.label);
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp);
      out << io::to_json(table, level).dump() << '\n';
      if (!out)
        throw Error("cannot write cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
    ++stats_.written;
  }

  const std::filesystem::path &dir() const { return dir_; }
  Stats stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
  }
  std::string last_discard() const {
    std::lock_guard lock(mutex_);
    return last_discard_;
  }

private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  Stats stats_;
  std::string last_discard_;
};

} // namespace hecke
