"""Спектральное ядро: сетка, поля, операторы, снимки."""
