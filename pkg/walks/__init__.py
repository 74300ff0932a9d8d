"""Classical and quantum walk engines"""
