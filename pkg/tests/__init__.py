"""Тесты Korteweg Lab."""
