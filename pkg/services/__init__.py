"""Services module"""

