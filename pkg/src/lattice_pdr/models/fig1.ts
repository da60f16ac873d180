ts
# seven states, s5 and s6 are unreachable; s6 is the only unsafe one
states 7
initial 0
safe 0 1 2 3 4 5
edge 0 1
edge 0 2
edge 1 0
edge 1 3
edge 2 2
edge 2 3
edge 3 4
edge 4 4
edge 5 5
edge 5 6
edge 6 6
