# keeps the tests directory importable (oracles.py, corpus.py helpers)
