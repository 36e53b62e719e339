#include "discrimq/nn/param_store.hpp"

#include <cmath>

#include "discrimq/errors.hpp"

namespace discrimq::nn {

template <typename T>
ParamId ParamStore<T>::add(std::string name, std::size_t rows, std::size_t cols, bool trainable) {
    if (index_.contains(name)) {
        throw StateError("duplicate parameter name: " + name);
    }
    Entry e;
    e.name = name;
    e.value = Tensor<T>(rows, cols);
    e.grad = Tensor<T>(rows, cols);
    e.first_moment = Tensor<T>(rows, cols);
    e.second_moment = Tensor<T>(rows, cols);
    e.trainable = trainable;
    entries_.push_back(std::move(e));
    index_.emplace(std::move(name), entries_.size() - 1);
    return ParamId{entries_.size() - 1};
}

template <typename T>
ParamId ParamStore<T>::id(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw IndexError("unknown parameter: " + std::string(name));
    }
    return ParamId{it->second};
}

template <typename T>
bool ParamStore<T>::contains(std::string_view name) const {
    return index_.find(name) != index_.end();
}

template <typename T>
std::size_t ParamStore<T>::parameter_count() const noexcept {
    std::size_t n = 0;
    for (auto const& e : entries_) {
        n += e.value.size();
    }
    return n;
}

template <typename T>
void ParamStore<T>::set_step(std::uint64_t step) {
    if (step < step_) {
        throw StateError("parameter store step counter cannot decrease");
    }
    step_ = step;
}

template <typename T>
void ParamStore<T>::zero_grad() {
    for (auto& e : entries_) {
        e.grad.fill(T{0});
        e.grad_ready = true;
    }
}

template <typename T>
void ParamStore<T>::init_uniform(Rng& rng) {
    for (auto& e : entries_) {
        double const bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(e.value.cols(), 1)));
        for (auto& v : e.value.data()) {
            v = static_cast<T>(rng.uniform(-bound, bound));
        }
    }
}

template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace discrimq::nn
