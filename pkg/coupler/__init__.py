"""Directional coupler design and bend-loss tables"""
