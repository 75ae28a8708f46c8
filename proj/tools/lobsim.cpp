// Command-line entry point. Subcommands are wired up as the library
// modules land; see README for usage.

#include <cstdio>

int main() {
  std::puts("lobsim: subcommands not wired yet");
  return 1;
}
