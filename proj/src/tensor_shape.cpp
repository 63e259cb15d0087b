#include "ttrp/tensor_shape.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "ttrp/errors.hpp"

namespace ttrp {

TensorShape::TensorShape(std::vector<Index> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) throw ShapeError("tensor shape needs at least one mode");
    total_ = 1;
    for (Index n : modes_) {
        if (n < 1) throw ShapeError("tensor mode sizes must be positive");
        if (total_ > std::numeric_limits<Index>::max() / n)
            throw ShapeError("tensor shape total overflows");
        total_ *= n;
    }
}

Index TensorShape::max_mode() const noexcept {
    return modes_.empty() ? 0 : *std::max_element(modes_.begin(), modes_.end());
}

std::string TensorShape::to_string() const {
    std::string out;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        if (k) out += 'x';
        out += std::to_string(modes_[k]);
    }
    return out;
}

std::vector<Index> to_multi_index(Index linear, const TensorShape& shape) {
    if (linear < 0 || linear >= shape.total())
        throw IndexError("linear index " + std::to_string(linear) + " out of range for shape " +
                         shape.to_string());
    std::vector<Index> multi(shape.order());
    for (std::size_t k = shape.order(); k-- > 0;) {
        const Index n = shape.mode(k);
        multi[k] = linear % n;
        linear /= n;
    }
    return multi;
}

Index to_linear_index(const std::vector<Index>& multi, const TensorShape& shape) {
    if (multi.size() != shape.order())
        throw IndexError("multi-index has wrong order for shape " + shape.to_string());
    Index linear = 0;
    for (std::size_t k = 0; k < multi.size(); ++k) {
        if (multi[k] < 0 || multi[k] >= shape.mode(k))
            throw IndexError("multi-index component out of range for shape " + shape.to_string());
        linear = linear * shape.mode(k) + multi[k];
    }
    return linear;
}

TensorShape parse_shape(const std::string& text) {
    // Tokens are separated by exactly one of 'x', ',' or '*'; spaces around tokens are ignored.
    std::vector<Index> modes;
    const char* p = text.data();
    const char* end = p + text.size();
    const auto skip_spaces = [&] {
        while (p < end && *p == ' ') ++p;
    };
    const auto fail = [&]() -> TensorShape { throw ShapeError("cannot parse shape '" + text + "'"); };
    skip_spaces();
    while (p < end) {
        Index v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{}) return fail();
        modes.push_back(v);
        p = next;
        skip_spaces();
        if (p == end) break;
        if (*p != 'x' && *p != ',' && *p != '*') return fail();
        ++p;
        skip_spaces();
        if (p == end) return fail();
    }
    return TensorShape(std::move(modes));
}

} // namespace ttrp
