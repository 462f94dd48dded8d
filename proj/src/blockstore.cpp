// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/blockstore.hpp"

#include "bsmu/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace bsmu {

namespace fs = std::filesystem;

void validate(const StoreConfig& config) {
  if (config.block_size_bytes < 1) throw InvalidConfig("block_size_bytes must be >= 1");
  if (config.node_count < 1) throw InvalidConfig("node_count must be >= 1");
  if (config.replication_factor < 1) throw InvalidConfig("replication_factor must be >= 1");
  if (config.replication_factor > config.node_count) {
    throw InvalidConfig("replication_factor must not exceed node_count");
  }
}

BlockStore::BlockStore(StoreConfig config) : config_(config) { validate(config_); }

BlockManifest BlockStore::put(const std::string& path, ByteView data) {
  return put(path, data, config_);
}

BlockManifest BlockStore::put(const std::string& path, ByteView data, const StoreConfig& config) {
  if (path.empty()) throw EmptyPath("block store path must not be empty");
  validate(config);
  {
    std::shared_lock lock(mutex_);
    if (files_.contains(path)) throw PathExists("path already present: " + path);
  }

  auto entry = std::make_shared<Entry>();
  BlockManifest& m = entry->manifest;
  m.path = path;
  m.total_bytes = data.size();
  m.block_size_bytes = config.block_size_bytes;
  const std::uint64_t count = (data.size() + config.block_size_bytes - 1) / config.block_size_bytes;
  m.blocks.reserve(count);
  entry->replicas.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t offset = i * config.block_size_bytes;
    const auto payload = data.subspan(offset, std::min<std::uint64_t>(config.block_size_bytes,
                                                                       data.size() - offset));
    BlockInfo info;
    info.index = i;
    info.length = payload.size();
    info.checksum = fnv1a64(payload);
    for (std::uint32_t k = 0; k < config.replication_factor; ++k) {
      info.replica_nodes.push_back(static_cast<std::uint32_t>((i + k) % config.node_count));
    }
    m.blocks.push_back(std::move(info));
    entry->replicas.emplace_back(config.replication_factor, Bytes(payload.begin(), payload.end()));
  }
  BlockManifest result = m;
  insert(std::move(entry), false);
  bytes_written_ += data.size() * config.replication_factor;
  blocks_written_ += count * config.replication_factor;
  return result;
}

BlockManifest BlockStore::put_or_replace(const std::string& path, ByteView data) {
  remove(path);
  return put(path, data);
}

void BlockStore::insert(std::shared_ptr<Entry> entry, bool replace) {
  std::unique_lock lock(mutex_);
  const std::string& path = entry->manifest.path;
  if (!replace && files_.contains(path)) throw PathExists("path already present: " + path);
  files_[path] = std::move(entry);
}

const Bytes& BlockStore::intact_replica(const Entry& entry, std::uint64_t block) const {
  const BlockInfo& info = entry.manifest.blocks[block];
  for (const Bytes& copy : entry.replicas[block]) {
    if (copy.size() == info.length && fnv1a64(copy) == info.checksum) return copy;
  }
  throw CorruptBlock("all replicas of block " + std::to_string(block) + " of " +
                     entry.manifest.path + " failed checksum");
}

Bytes BlockStore::get(const std::string& path) const {
  std::shared_lock lock(mutex_);
  auto it = files_.find(path);
  if (it == files_.end()) throw NotFound("no such path: " + path);
  const Entry& entry = *it->second;
  Bytes out;
  out.reserve(entry.manifest.total_bytes);
  for (std::uint64_t i = 0; i < entry.manifest.block_count(); ++i) {
    const Bytes& copy = intact_replica(entry, i);
    out.insert(out.end(), copy.begin(), copy.end());
  }
  bytes_read_ += out.size();
  blocks_read_ += entry.manifest.block_count();
  return out;
}

Bytes BlockStore::read_range(const std::string& path, std::uint64_t offset,
                             std::uint64_t length) const {
  std::shared_lock lock(mutex_);
  auto it = files_.find(path);
  if (it == files_.end()) throw NotFound("no such path: " + path);
  const Entry& entry = *it->second;
  const BlockManifest& m = entry.manifest;
  if (offset > m.total_bytes || length > m.total_bytes - offset) {
    throw std::out_of_range("read past end of " + path);
  }
  Bytes out;
  out.reserve(length);
  if (length == 0) return out;
  const std::uint64_t first = offset / m.block_size_bytes;
  const std::uint64_t last = (offset + length - 1) / m.block_size_bytes;
  for (std::uint64_t b = first; b <= last; ++b) {
    const Bytes& copy = intact_replica(entry, b);
    const std::uint64_t base = m.block_offset(b);
    const std::uint64_t lo = std::max(offset, base) - base;
    const std::uint64_t hi = std::min(offset + length, base + copy.size()) - base;
    out.insert(out.end(), copy.begin() + static_cast<std::ptrdiff_t>(lo),
               copy.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  bytes_read_ += length;
  blocks_read_ += last - first + 1;
  return out;
}

BlockManifest BlockStore::manifest(const std::string& path) const {
  std::shared_lock lock(mutex_);
  auto it = files_.find(path);
  if (it == files_.end()) throw NotFound("no such path: " + path);
  return it->second->manifest;
}

bool BlockStore::exists(const std::string& path) const {
  std::shared_lock lock(mutex_);
  return files_.contains(path);
}

bool BlockStore::remove(const std::string& path) {
  std::unique_lock lock(mutex_);
  return files_.erase(path) > 0;
}

std::vector<std::string> BlockStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  out.reserve(files_.size());
  for (const auto& [path, _] : files_) out.push_back(path);
  return out;
}

IOCounters BlockStore::counters() const noexcept {
  return {bytes_read_.load(), bytes_written_.load(), blocks_read_.load(), blocks_written_.load()};
}

void BlockStore::corrupt_replica(const std::string& path, std::uint64_t block_index,
                                 std::uint32_t node) {
  std::unique_lock lock(mutex_);
  auto it = files_.find(path);
  if (it == files_.end()) throw NotFound("no such path: " + path);
  Entry& entry = *it->second;
  if (block_index >= entry.manifest.block_count()) {
    throw NotFound("no block " + std::to_string(block_index) + " in " + path);
  }
  const auto& nodes = entry.manifest.blocks[block_index].replica_nodes;
  auto pos = std::find(nodes.begin(), nodes.end(), node);
  if (pos == nodes.end()) throw NotFound("node holds no replica of that block");
  Bytes& copy = entry.replicas[block_index][static_cast<std::size_t>(pos - nodes.begin())];
  if (copy.empty()) {
    copy.push_back(0xff);
  } else {
    copy[copy.size() / 2] ^= 0x5a;
  }
}

std::uint64_t BlockStore::node_bytes(std::uint32_t node) const {
  std::shared_lock lock(mutex_);
  std::uint64_t total = 0;
  for (const auto& [_, entry] : files_) {
    for (const BlockInfo& b : entry->manifest.blocks) {
      if (std::find(b.replica_nodes.begin(), b.replica_nodes.end(), node) != b.replica_nodes.end()) {
        total += b.length;
      }
    }
  }
  return total;
}

std::string BlockStore::format_manifest(const BlockManifest& manifest) {
  std::string out;
  char hex[17];
  for (const BlockInfo& b : manifest.blocks) {
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(b.checksum));
    out += std::to_string(b.index) + ' ' + std::to_string(b.length) + ' ' + hex + ' ';
    for (std::size_t k = 0; k < b.replica_nodes.size(); ++k) {
      if (k) out += ',';
      out += std::to_string(b.replica_nodes[k]);
    }
    out += '\n';
  }
  return out;
}

BlockManifest BlockStore::parse_manifest(const std::string& path, const std::string& text) {
  BlockManifest m;
  m.path = path;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string index, length, checksum, nodes;
    if (!(fields >> index >> length >> checksum >> nodes)) {
      throw MalformedInput("manifest line " + std::to_string(line_no) + ": expected 4 fields");
    }
    BlockInfo b;
    auto num = [&](const std::string& s, int base, std::uint64_t& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        throw MalformedInput("manifest line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
    };
    num(index, 10, b.index);
    num(length, 10, b.length);
    num(checksum, 16, b.checksum);
    std::size_t start = 0;
    while (start <= nodes.size()) {
      const std::size_t comma = std::min(nodes.find(',', start), nodes.size());
      std::uint64_t node = 0;
      num(nodes.substr(start, comma - start), 10, node);
      b.replica_nodes.push_back(static_cast<std::uint32_t>(node));
      start = comma + 1;
    }
    if (b.index != m.blocks.size()) {
      throw MalformedInput("manifest line " + std::to_string(line_no) + ": blocks out of order");
    }
    m.total_bytes += b.length;
    m.blocks.push_back(std::move(b));
  }
  return m;
}

void BlockStore::save(const fs::path& root) const {
  std::shared_lock lock(mutex_);
  for (const auto& [path, entry] : files_) {
    const fs::path dir = root / path;
    fs::create_directories(dir);
    for (std::uint64_t i = 0; i < entry->manifest.block_count(); ++i) {
      const Bytes& copy = intact_replica(*entry, i);
      std::ofstream out(dir / ("block_" + std::to_string(i)), std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(copy.data()), static_cast<std::streamsize>(copy.size()));
      if (!out) throw Error("failed writing block file under " + dir.string());
    }
    std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
    manifest << format_manifest(entry->manifest);
    if (!manifest) throw Error("failed writing manifest under " + dir.string());
  }
}

std::unique_ptr<BlockStore> BlockStore::load(const fs::path& root, StoreConfig config) {
  auto store = std::make_unique<BlockStore>(config);
  if (!fs::exists(root)) throw NotFound("no store directory at " + root.string());
  std::vector<fs::path> manifests;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == "manifest.txt") manifests.push_back(e.path());
  }
  std::sort(manifests.begin(), manifests.end());
  for (const fs::path& mpath : manifests) {
    const std::string path = fs::relative(mpath.parent_path(), root).generic_string();
    std::ifstream min(mpath);
    const std::string text((std::istreambuf_iterator<char>(min)), std::istreambuf_iterator<char>());

    auto entry = std::make_shared<Entry>();
    entry->manifest = parse_manifest(path, text);
    BlockManifest& m = entry->manifest;
    m.block_size_bytes = m.blocks.size() > 1
                             ? m.blocks.front().length
                             : std::max<std::uint64_t>(config.block_size_bytes,
                                                       m.blocks.empty() ? 1 : m.blocks.front().length);
    for (const BlockInfo& b : m.blocks) {
      std::ifstream bin(mpath.parent_path() / ("block_" + std::to_string(b.index)), std::ios::binary);
      Bytes data((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
      if (data.size() != b.length || fnv1a64(data) != b.checksum) {
        throw CorruptBlock("block " + std::to_string(b.index) + " of " + path + " failed checksum");
      }
      entry->replicas.emplace_back(b.replica_nodes.size(), data);
      store->bytes_written_ += data.size() * b.replica_nodes.size();
      store->blocks_written_ += b.replica_nodes.size();
    }
    store->insert(std::move(entry), false);
  }
  return store;
}

}  // namespace bsmu
