using System;
using System.Data;
using System.Data.SqlClient;

public static class StoreSales
{
    public static DataTable Load(SqlConnection conn)
    {
        var cmd = new SqlCommand("SELECT store_id, amount, order_id, order_date FROM sales.orders", conn);
        var table = new DataTable();
        table.Load(cmd.ExecuteReader());
        return table;
    }
}

>>>>>

SELECT
    s.store_id AS StoreId,
    SUM(s.amount) AS TotalSales,
    COUNT(s.order_id) AS OrderCount,
    MAX(s.order_date) AS LastOrderDate,
    MIN(s.amount) AS SmallestOrder,
    AVG(s.amount) AS AverageOrderAmount
FROM sales.orders AS s
GROUP BY s.store_id;
