#include "fairaudit/rag/chunker.hpp"

#include <cstdio>

namespace fairaudit::rag {

namespace {

/// Byte offset of every code point start, plus a trailing text.size().
std::vector<std::size_t> code_point_offsets(const std::string& text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto byte = static_cast<unsigned char>(text[i]);
    if ((byte & 0xC0) != 0x80 || i == 0) offsets.push_back(i);
  }
  offsets.push_back(text.size());
  return offsets;
}

}  // namespace

std::string make_chunk_id(const std::string& source_id, std::size_t ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%04zu", ordinal);
  return source_id + buf;
}

std::size_t count_code_points(const std::string& text) {
  return code_point_offsets(text).size() - 1;
}

std::vector<Chunk> chunk_document(const SourceDocument& doc, std::size_t size,
                                  std::size_t overlap) {
  if (size == 0 || overlap >= size) {
    throw RagError("chunk overlap must be smaller than chunk size");
  }
  const auto offsets = code_point_offsets(doc.text);
  const std::size_t length = offsets.size() - 1;
  const std::size_t stride = size - overlap;

  std::vector<Chunk> chunks;
  for (std::size_t start = 0; start < length; start += stride) {
    const std::size_t end = std::min(start + size, length);
    chunks.push_back({make_chunk_id(doc.id, chunks.size()), doc.id, start, end,
                      doc.text.substr(offsets[start], offsets[end] - offsets[start])});
    if (end == length) break;
  }
  return chunks;
}

}  // namespace fairaudit::rag
