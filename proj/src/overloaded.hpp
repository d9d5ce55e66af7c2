#pragma once

namespace csc {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace csc
