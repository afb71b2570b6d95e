"""Two-magnon spectrum of the Inozemtsev elliptic spin chain."""
