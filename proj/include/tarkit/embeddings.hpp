#pragma once

#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tarkit/error.hpp"
#include "tarkit/math.hpp"

namespace tarkit {

/// Dense word vectors keyed by token, held in one contiguous buffer.
class Embeddings {
  public:
    Embeddings() = default;
    Embeddings(size_t dim) : dim_(dim) {}

    size_t dim() const { return dim_; }
    size_t size() const { return tokens_.size(); }

    bool contains(const std::string& token) const { return index_.count(token) > 0; }

    std::span<const double> vector(const std::string& token) const {
        auto it = index_.find(token);
        if (it == index_.end()) fail("token has no embedding: " + token);
        return {data_.data() + it->second * dim_, dim_};
    }

    std::span<const double> operator[](const std::string& token) const { return vector(token); }

    void add(const std::string& token, std::span<const double> values) {
        if (values.size() != dim_) fail("embedding dimension mismatch for token: " + token);
        auto [it, inserted] = index_.emplace(token, tokens_.size());
        if (!inserted) fail("duplicate embedding token: " + token);
        tokens_.push_back(token);
        data_.insert(data_.end(), values.begin(), values.end());
    }

  private:
    size_t dim_ = 0;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, size_t> index_;
    std::vector<double> data_;
};

/// Loads the common text vector format: a `count dim` header line followed by
/// `token v1 ... vdim` lines.
inline Embeddings load_embeddings_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open embeddings file: " + path);
    std::string line;
    if (!std::getline(is, line)) fail("empty embeddings file: " + path);
    size_t count = 0, dim = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> count >> dim) || dim == 0)
            fail(path + ":1: expected `count dim` header");
    }
    Embeddings emb(dim);
    std::vector<double> values(dim);
    size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        if (!(ss >> token)) fail(path + ":" + std::to_string(line_no) + ": missing token");
        for (size_t i = 0; i < dim; ++i)
            if (!(ss >> values[i]))
                fail(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                     " values for token " + token);
        try {
            emb.add(token, values);
        } catch (const Error& e) {
            fail(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (emb.size() != count)
        fail(path + ": header promised " + std::to_string(count) + " vectors, found " +
             std::to_string(emb.size()));
    return emb;
}

/// Mean of the embeddings of in-vocabulary tokens; all-zero when no token is
/// covered. Repeated tokens contribute once per occurrence.
inline std::vector<double> sentence_embedding(const std::vector<std::string>& tokens,
                                              const Embeddings& emb) {
    std::vector<double> acc(emb.dim(), 0.0);
    size_t n = 0;
    for (const auto& t : tokens) {
        if (!emb.contains(t)) continue;
        auto v = emb.vector(t);
        for (size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
        ++n;
    }
    if (n > 0)
        for (double& x : acc) x /= static_cast<double>(n);
    return acc;
}

}  // namespace tarkit
