# Rectified flow radar detection package
