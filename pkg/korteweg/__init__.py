"""Korteweg Lab - псевдоспектральная лаборатория для неоднородной несжимаемой системы Навье-Стокса-Кортевега на торе."""

__version__ = "0.1.0"
