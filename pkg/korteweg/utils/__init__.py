"""Утилиты вывода"""
