#pragma once

#include <fftw3.h>

#include <cassert>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>

namespace l1rx {

using cplx = std::complex<double>;

// Thin wrapper over FFTW double-precision 1-D transforms. Plans are cached
// per (size, direction) and created under a lock; execution on caller
// buffers is re-entrant. Inverse transform is unnormalized (scaled by n),
// matching FFTW convention.
class Fft {
public:
    static void forward(std::span<const cplx> in, std::span<cplx> out) {
        execute(in, out, FFTW_FORWARD);
    }

    static void inverse(std::span<const cplx> in, std::span<cplx> out) {
        execute(in, out, FFTW_BACKWARD);
    }

private:
    static void execute(std::span<const cplx> in, std::span<cplx> out,
                        int sign) {
        assert(in.size() == out.size());
        assert(static_cast<const void*>(in.data()) !=
               static_cast<void*>(out.data()));
        fftw_plan plan = plan_for(in.size(), sign);
        // fftw_execute_dft does not modify the input for out-of-place c2c
        fftw_execute_dft(
            plan,
            reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
            reinterpret_cast<fftw_complex*>(out.data()));
    }

    static fftw_plan plan_for(std::size_t n, int sign) {
        static std::mutex mtx;
        static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
        std::lock_guard lock(mtx);
        auto key = std::make_pair(n, sign);
        auto it = cache.find(key);
        if (it != cache.end())
            return it->second;
        std::vector<cplx> a(n), b(n);
        fftw_plan plan = fftw_plan_dft_1d(
            static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
            reinterpret_cast<fftw_complex*>(b.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, plan);
        return plan;
    }
};

} // namespace l1rx
