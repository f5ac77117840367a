#pragma once

#include <gtest/gtest.h>

#include "mrid/error.hpp"

namespace support {

/// Kind of the mrid::Error thrown by f; records a test failure if nothing is thrown.
template <typename F>
mrid::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const mrid::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no mrid::Error thrown";
  return mrid::ErrorKind::InvalidArgument;
}

}  // namespace support
