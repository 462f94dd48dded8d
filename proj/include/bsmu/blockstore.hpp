// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

/// @file blockstore.hpp
/// @brief In-memory block store: fixed-size blocks, deterministic replica
/// placement, FNV-1a block checksums and metered I/O.

#pragma once

#include "bsmu/bytes.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace bsmu {

struct StoreConfig {
  std::uint64_t block_size_bytes = 1024;
  std::uint32_t replication_factor = 3;
  std::uint32_t node_count = 4;
};

/// @throws InvalidConfig
void validate(const StoreConfig& config);

struct BlockInfo {
  std::uint64_t index = 0;
  std::uint64_t length = 0;
  std::uint64_t checksum = 0;
  std::vector<std::uint32_t> replica_nodes;

  friend bool operator==(const BlockInfo&, const BlockInfo&) = default;
};

struct BlockManifest {
  std::string path;
  std::uint64_t total_bytes = 0;
  std::uint64_t block_size_bytes = 0;
  std::vector<BlockInfo> blocks;

  std::uint64_t block_count() const noexcept { return blocks.size(); }
  /// Byte offset of block `i` within the file.
  std::uint64_t block_offset(std::uint64_t i) const noexcept { return i * block_size_bytes; }
};

struct IOCounters {
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t blocks_read = 0;
  std::uint64_t blocks_written = 0;

  friend bool operator==(const IOCounters&, const IOCounters&) = default;
};

/// Thread-safe. Readers share a lock; a put builds its blocks before taking
/// the exclusive lock, so writers to distinct paths only contend on insert.
class BlockStore {
 public:
  explicit BlockStore(StoreConfig config = {});

  BlockStore(const BlockStore&) = delete;
  BlockStore& operator=(const BlockStore&) = delete;

  const StoreConfig& config() const noexcept { return config_; }

  /// @throws EmptyPath, PathExists, InvalidConfig
  BlockManifest put(const std::string& path, ByteView data);
  BlockManifest put(const std::string& path, ByteView data, const StoreConfig& config);

  /// Replaces `path` if it exists.
  BlockManifest put_or_replace(const std::string& path, ByteView data);

  /// @throws NotFound, CorruptBlock
  Bytes get(const std::string& path) const;

  /// Reads `length` bytes at `offset`, touching only the blocks that cover the
  /// range. @throws NotFound, CorruptBlock, std::out_of_range
  Bytes read_range(const std::string& path, std::uint64_t offset, std::uint64_t length) const;

  /// @throws NotFound
  BlockManifest manifest(const std::string& path) const;

  bool exists(const std::string& path) const;
  /// Removes `path`; returns false if it was absent.
  bool remove(const std::string& path);
  std::vector<std::string> list() const;

  IOCounters counters() const noexcept;

  /// Flips one byte of the replica of block `block_index` held by `node`.
  /// Test hook for replica fail-over. @throws NotFound
  void corrupt_replica(const std::string& path, std::uint64_t block_index, std::uint32_t node);

  /// Bytes held on `node` across all replicas.
  std::uint64_t node_bytes(std::uint32_t node) const;

  /// Writes `<root>/<path>/block_<i>` and `<root>/<path>/manifest.txt` for
  /// every stored path. Block bytes come from the first intact replica.
  void save(const std::filesystem::path& root) const;

  /// Loads a directory written by save(); blocks are re-replicated per the
  /// stored node lists and checksums are verified.
  static std::unique_ptr<BlockStore> load(const std::filesystem::path& root, StoreConfig config = {});

  /// `index length checksum_hex node_ids_csv` per block.
  static std::string format_manifest(const BlockManifest& manifest);
  static BlockManifest parse_manifest(const std::string& path, const std::string& text);

 private:
  struct Entry {
    BlockManifest manifest;
    // replicas[i][k] is the copy of block i on manifest.blocks[i].replica_nodes[k].
    std::vector<std::vector<Bytes>> replicas;
  };

  const Bytes& intact_replica(const Entry& entry, std::uint64_t block) const;
  void insert(std::shared_ptr<Entry> entry, bool replace);

  StoreConfig config_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> files_;

  mutable std::atomic<std::uint64_t> bytes_read_{0};
  std::atomic<std::uint64_t> bytes_written_{0};
  mutable std::atomic<std::uint64_t> blocks_read_{0};
  std::atomic<std::uint64_t> blocks_written_{0};
};

}  // namespace bsmu
