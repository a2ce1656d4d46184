"""zhulab: exact-arithmetic lab for level-n Zhu algebras and their module functors."""

__version__ = "0.1.0"
