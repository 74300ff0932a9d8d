"""Database module - SQLite models and management"""

