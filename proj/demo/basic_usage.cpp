// Right cosets of T1(2) at level 2, the product T1(2) T2(2), and the same
// generator seen from the paramodular side.

#include "hecke/symplectic.hpp"

#include <iostream>

int main() {
  using namespace hecke;
  const Level level(2);
  HeckeContext ctx(level);

  const auto t1 = label_t1(2), t2 = label_t2(2);
  std::cout << t1 << ": " << ctx.table(t1).size() << " right cosets\n";
  std::cout << t2 << ": " << ctx.table(t2).size() << " right cosets\n";
  std::cout << "T1(2) T2(2) = " << multiply(ctx, HeckeElement(t1), HeckeElement(t2)) << '\n';

  const SympElement w = w_element(level, 2);
  const OrthoElement image = to_orthogonal(w);
  std::cout << "W_2 maps to " << double_coset_canonical(image) << '\n';

  SigmaHeckeContext sigma(ctx);
  const ParamodHeckeElement a(sigma_label_w(2)), b(sigma_label_t2(2));
  std::cout << "W_2 T2(2) = " << sigma_multiply(sigma, a, b) << '\n';
  std::cout << "T2(2) W_2 = " << sigma_multiply(sigma, b, a) << '\n';
}
