#include <iostream>

int main() {
  std::cout << "tailopt\n";
  return 0;
}
