#include "pme/link_function.hpp"

#include <json.hpp>

#include <stdexcept>
#include <utility>

namespace pme {

LinkFunction::LinkFunction(std::size_t k, std::vector<std::uint32_t> flat, std::string descriptor)
    : k_(k), table_(std::move(flat)), descriptor_(std::move(descriptor)) {}

LinkFunction::LinkFunction(std::size_t k, const std::vector<std::vector<std::uint32_t>>& table)
    : k_(k), descriptor_("custom:k=" + std::to_string(k)) {
    if (k == 0) throw std::invalid_argument("link function: k must be >= 1");
    if (table.size() != k) {
        throw std::invalid_argument("link function: table has " + std::to_string(table.size()) +
                                    " rows, expected " + std::to_string(k));
    }
    table_.reserve(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        if (table[i].size() != k) {
            throw std::invalid_argument("link function: row " + std::to_string(i) + " has " +
                                        std::to_string(table[i].size()) + " entries, expected " +
                                        std::to_string(k));
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (table[i][j] >= k) {
                throw std::invalid_argument("link function: value " + std::to_string(table[i][j]) +
                                            " at (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") out of range [0," + std::to_string(k) + ")");
            }
            table_.push_back(table[i][j]);
        }
    }
}

LinkFunction LinkFunction::block_circulant(std::size_t k) {
    if (k == 0) throw std::invalid_argument("block_circulant: k must be >= 1");
    std::vector<std::uint32_t> flat(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) flat[i * k + j] = static_cast<std::uint32_t>(i);
    return LinkFunction(k, std::move(flat), "builtin:block:" + std::to_string(k));
}

LinkFunction LinkFunction::example_f2() {
    std::vector<std::uint32_t> flat(4);
    for (long long i = 0; i < 2; ++i)
        for (long long j = 0; j < 2; ++j)
            flat[static_cast<std::size_t>(i * 2 + j)] =
                static_cast<std::uint32_t>(math_mod((i - j) * i, 2));
    return LinkFunction(2, std::move(flat), "builtin:f2");
}

LinkFunction LinkFunction::example_f3() {
    std::vector<std::uint32_t> flat(4);
    for (long long i = 0; i < 2; ++i)
        for (long long j = 0; j < 2; ++j)
            flat[static_cast<std::size_t>(i * 2 + j)] =
                static_cast<std::uint32_t>(math_mod((i - j + 1) * i, 2));
    return LinkFunction(2, std::move(flat), "builtin:f3");
}

LinkFunction LinkFunction::parse(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("link file: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("k") || !doc.contains("table"))
        throw std::invalid_argument("link file: expected an object with \"k\" and \"table\"");
    if (!doc["k"].is_number_integer() || doc["k"].get<long long>() < 1)
        throw std::invalid_argument("link file: \"k\" must be a positive integer");
    const auto k = doc["k"].get<std::size_t>();
    if (!doc["table"].is_array())
        throw std::invalid_argument("link file: \"table\" must be an array of rows");
    std::vector<std::vector<std::uint32_t>> table;
    table.reserve(doc["table"].size());
    for (const auto& row : doc["table"]) {
        if (!row.is_array()) throw std::invalid_argument("link file: table rows must be arrays");
        std::vector<std::uint32_t> r;
        r.reserve(row.size());
        for (const auto& v : row) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw std::invalid_argument("link file: table entries must be non-negative integers");
            const auto value = v.get<unsigned long long>();
            if (value >= k)
                throw std::invalid_argument("link file: residue " + std::to_string(value) +
                                            " out of range [0," + std::to_string(k) + ")");
            r.push_back(static_cast<std::uint32_t>(value));
        }
        table.push_back(std::move(r));
    }
    return LinkFunction(k, table);
}

std::string LinkFunction::serialize() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < k_; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < k_; ++j) row.push_back(table_[i * k_ + j]);
        rows.push_back(std::move(row));
    }
    nlohmann::json doc;
    doc["k"] = k_;
    doc["table"] = std::move(rows);
    return doc.dump();
}

}  // namespace pme
