import pyspark.sql.functions as F

def clean_products(df):
    trimmed = df.withColumn("product_name", F.trim("product_name"))
    priced = trimmed.withColumn("list_price", F.col("list_price").cast("double"))
    return priced.filter(F.col("list_price") >= 0)

def clean_suppliers(df):
    return df.withColumn("supplier_name", F.initcap("supplier_name"))

if __name__ == "__main__":
    products_df = spark.read.load('abfss://retail@lake.dfs.core.windows.net/raw/products.parquet', format='parquet')
    suppliers_df = spark.read.load('abfss://retail@lake.dfs.core.windows.net/raw/suppliers.parquet', format='parquet')
    categories_df = spark.read.load('abfss://retail@lake.dfs.core.windows.net/raw/categories.parquet', format='parquet')

    clean_products(products_df).write.mode('overwrite').parquet('abfss://retail@lake.dfs.core.windows.net/curated/products.parquet')
    clean_suppliers(suppliers_df).write.mode('overwrite').parquet('abfss://retail@lake.dfs.core.windows.net/curated/suppliers.parquet')
    categories_df.write.mode('overwrite').parquet('abfss://retail@lake.dfs.core.windows.net/curated/categories.parquet')

>>>>>

SELECT
    P.product_id AS ProductId,
    P.product_name AS ProductName,
    P.list_price AS ListPrice,
    S.supplier_name AS SupplierName,
    S.country AS SupplierCountry,
    C.category_name AS CategoryName,
    COALESCE(P.discontinued, 0) AS IsDiscontinued
FROM
    Products AS P
INNER JOIN
    Suppliers AS S ON P.supplier_id = S.supplier_id
LEFT JOIN
    Categories AS C ON P.category_id = C.category_id
WHERE
    P.list_price > 0;
